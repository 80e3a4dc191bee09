#include "risnull/channel_model.hpp"
#include "risnull/nulling_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <tuple>

using namespace risnull;

namespace {

SystemConfig small_config(int G, int M, int K, int N, double eta) {
  SystemConfig c;
  c.cells = G;
  c.antennas = M;
  c.users = K;
  c.elements = N;
  c.eta = eta;
  return c;
}

// Interference seen on antenna k of BS i from user j of cell g, computed
// term by term from the channels.
Complex interference_term(const ChannelRealization& r, const CVector& v, int i, int k, int g, int j) {
  Complex acc = r.h_direct(i, g, j)(k);
  const CMatrix& H = r.H(i);
  const CVector& h = r.h_ris(g, j);
  for (Index n = 0; n < r.elements; ++n) acc += std::conj(H(n, k)) * h(n) * v(n);
  return acc;
}

}  // namespace

TEST_CASE("config: exactly one direct-strength field") {
  SystemConfig c = small_config(2, 2, 2, 8, 1.0);
  CHECK_NOTHROW(c.validate());
  c.sigma3 = 0.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.eta.reset();
  CHECK_NOTHROW(c.validate());
  CHECK(c.strength_ratio() == doctest::Approx(0.5));
  c.cells = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("config: eta derives sigma3 through sigma4") {
  SystemConfig c = small_config(2, 2, 2, 8, 3.0);
  c.sigma1 = 0.5;
  c.sigma2 = 0.2;
  CHECK(c.sigma4() == doctest::Approx(0.1));
  CHECK(c.direct_std() == doctest::Approx(0.3));
}

TEST_CASE("sample_channels: shapes") {
  Rng rng(1);
  const SystemConfig c = small_config(2, 4, 3, 16, 1.0);
  const ChannelRealization r = sample_channels(c, rng);
  REQUIRE(r.ris_to_bs.size() == 2);
  CHECK(r.H(0).rows() == 16);
  CHECK(r.H(0).cols() == 4);
  CHECK(r.user_to_ris.size() == 6);
  CHECK(r.h_ris(1, 2).size() == 16);
  CHECK(r.user_to_bs.size() == 12);
  CHECK(r.h_direct(1, 0, 2).size() == 4);
}

TEST_CASE("sample_channels: zero direct strength blocks direct links") {
  Rng rng(2);
  const ChannelRealization r = sample_channels(small_config(2, 2, 2, 8, 0.0), rng);
  for (const CVector& h : r.user_to_bs) CHECK(h.norm() == 0.0);
}

TEST_CASE("sample_channels: per-entry variance of H") {
  Rng rng(3);
  SystemConfig c = small_config(1, 100, 1, 100, 0.0);
  const ChannelRealization r = sample_channels(c, rng);
  CHECK(r.H(0).cwiseAbs2().mean() == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("cascade: identities") {
  Rng rng(4);
  const CMatrix H = sample_complex_gaussian(6, 3, 1.0, rng);
  CHECK((cascade(H, CVector::Ones(6)) - H.adjoint()).norm() == 0.0);

  CVector e1 = CVector::Zero(6);
  e1(0) = 1.0;
  const CMatrix c1 = cascade(H, e1);
  CHECK(c1.rightCols(5).norm() == 0.0);
  CHECK((c1.col(0) - H.adjoint().col(0)).norm() == 0.0);

  const CVector h = sample_complex_gaussian_vector(6, 1.0, rng);
  const CVector v = PhaseVector::random(6, rng).values();
  const CVector lhs = cascade(H, h) * v;
  const CVector rhs = H.adjoint() * h.cwiseProduct(v);
  CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());

  CHECK_THROWS_AS(cascade(H, CVector::Ones(5)), std::invalid_argument);
}

TEST_CASE("assemble: row count and ordering") {
  Rng rng(5);
  const SystemConfig c = small_config(2, 4, 4, 20, 1.0);
  const ChannelRealization r = sample_channels(c, rng);
  const NullingSystem sys = assemble_nulling_system(r, PowerAllocation::active_subset(c), c);
  CHECK(sys.num_conditions() == 56);
  CHECK(sys.num_elements() == 20);
  REQUIRE(sys.rows.size() == 56);

  std::tuple<int, int, int, int> prev{-1, -1, -1, -1};
  for (std::size_t c_idx = 0; c_idx < sys.rows.size(); ++c_idx) {
    const NullingLink& l = sys.rows[c_idx];
    CHECK(l.ordinal == static_cast<int>(c_idx));
    CHECK_FALSE((l.rx_cell == l.tx_cell && l.rx_user == l.tx_user));
    const std::tuple<int, int, int, int> key{l.rx_cell, l.rx_antenna, l.tx_cell, l.tx_user};
    CHECK(prev < key);
    prev = key;
  }
}

TEST_CASE("assemble: single-cell single-user system is vacuous") {
  Rng rng(6);
  const SystemConfig c = small_config(1, 1, 1, 4, 1.0);
  const NullingSystem sys =
      assemble_nulling_system(sample_channels(c, rng), PowerAllocation::active_subset(c), c);
  CHECK(sys.num_conditions() == 0);
  SolverOptions opts;
  const SolveOutcome out = alternating_projection(sys, opts, rng);
  CHECK(out.feasible);
}

TEST_CASE("assemble: A^H v + b equals the interference terms") {
  Rng rng(7);
  const SystemConfig c = small_config(2, 2, 2, 12, 2.0);
  for (int t = 0; t < 50; ++t) {
    const ChannelRealization r = sample_channels(c, rng);
    const NullingSystem sys = assemble_nulling_system(r, PowerAllocation::active_subset(c), c);
    const CVector v = PhaseVector::random(c.elements, rng).values();
    const CVector lhs = sys.a.adjoint() * v + sys.b;
    for (const NullingLink& l : sys.rows) {
      const Complex ref = interference_term(r, v, l.rx_cell, l.rx_antenna, l.tx_cell, l.tx_user);
      CHECK(std::abs(lhs(l.ordinal) - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST_CASE("assemble: zero residual nulls every interference term") {
  // Build a v that zeros A^H v + b by least norm and check the terms, without
  // the unit-modulus constraint (linearity only).
  Rng rng(8);
  const SystemConfig c = small_config(2, 2, 2, 30, 1.0);
  const ChannelRealization r = sample_channels(c, rng);
  const NullingSystem sys = assemble_nulling_system(r, PowerAllocation::active_subset(c), c);
  const LeastNormSolution s = least_norm_solve(sys.a.adjoint(), -sys.b);
  for (const NullingLink& l : sys.rows) {
    CHECK(std::abs(interference_term(r, s.x, l.rx_cell, l.rx_antenna, l.tx_cell, l.tx_user)) < 1e-10);
  }
}

TEST_CASE("assemble: blocked direct links give a homogeneous, phase-invariant system") {
  Rng rng(9);
  const SystemConfig c = small_config(2, 2, 2, 10, 0.0);
  const NullingSystem sys =
      assemble_nulling_system(sample_channels(c, rng), PowerAllocation::active_subset(c), c);
  CHECK(sys.b.norm() == 0.0);
  const CVector v = PhaseVector::random(10, rng).values();
  const Complex rot = std::polar(1.0, 0.7);
  CHECK((sys.a.adjoint() * (rot * v) - rot * (sys.a.adjoint() * v)).norm() < 1e-12);
}

TEST_CASE("active users: first M by default, seeded subset on request") {
  SystemConfig c = small_config(2, 2, 4, 8, 1.0);
  c.power_per_user = 2.0;
  const PowerAllocation p = PowerAllocation::active_subset(c);
  CHECK(p.active_users(0) == std::vector<int>{0, 1});
  CHECK(p.active_users(1) == std::vector<int>{0, 1});
  CHECK(p.at(0, 0) == 2.0);
  CHECK(p.at(0, 3) == 0.0);

  c.random_active_users = true;
  CHECK_THROWS_AS(PowerAllocation::active_subset(c), std::invalid_argument);
  Rng a(10), b(10);
  const PowerAllocation pa = PowerAllocation::active_subset(c, &a);
  const PowerAllocation pb = PowerAllocation::active_subset(c, &b);
  CHECK(pa.power == pb.power);
  for (int g = 0; g < 2; ++g) CHECK(pa.active_users(g).size() == 2);

  // Decoded users in the row metadata follow the active set.
  Rng rng(11);
  const NullingSystem sys = assemble_nulling_system(sample_channels(c, rng), pa, c);
  CHECK(sys.num_conditions() == 12);
  for (const NullingLink& l : sys.rows) {
    CHECK(pa.active(l.rx_cell, l.rx_user));
    CHECK(pa.active(l.tx_cell, l.tx_user));
  }
}

TEST_CASE("assemble: wrong active count rejected") {
  Rng rng(12);
  const SystemConfig c = small_config(2, 2, 3, 8, 1.0);
  PowerAllocation p = PowerAllocation::active_subset(c);
  p.power[2] = 1.0;  // three active users in cell 0
  CHECK_THROWS_AS(assemble_nulling_system(sample_channels(c, rng), p, c), std::invalid_argument);
}

TEST_CASE("surrogate system moments") {
  Rng rng(13);
  const NullingSystem zero_b = surrogate_system(56, 200, 0.0, 1.0, rng);
  CHECK(zero_b.b.norm() == 0.0);
  CHECK(zero_b.a.rows() == 200);
  CHECK(zero_b.a.cols() == 56);
  CHECK(zero_b.a.cwiseAbs2().mean() == doctest::Approx(1.0).epsilon(0.03));

  double sum = 0.0;
  for (int t = 0; t < 1000; ++t) sum += surrogate_system(56, 4, 2.0, 1.0, rng).b.norm();
  CHECK(sum / 1000.0 == doctest::Approx(2.0 * std::sqrt(56.0)).epsilon(0.02));
}

TEST_CASE("path loss") {
  CHECK(db_to_linear(-30.0) == doctest::Approx(1e-3));
  CHECK(path_loss(1.0, db_to_linear(-30.0), 2.0) == doctest::Approx(1e-3));
  CHECK(path_loss(20.0, 1.0, 4.0) / path_loss(10.0, 1.0, 4.0) == doctest::Approx(1.0 / 16.0));
  CHECK_THROWS_AS(path_loss(0.0, 1.0, 2.0), std::invalid_argument);
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0));
}

TEST_CASE("geometric: per-user eta matches the distances") {
  Rng rng(14);
  const GeometryScenario scn = GeometryScenario::default_layout();
  const SystemConfig c = small_config(2, 2, 2, 4, 0.0);
  const GeometricRealization geo = sample_geometric(scn, c, rng);
  REQUIRE(geo.user_positions.size() == 4);
  for (int g = 0; g < 2; ++g) {
    for (int k = 0; k < 2; ++k) {
      const auto& p = geo.user_positions[static_cast<std::size_t>(g * 2 + k)];
      const auto& reg = scn.user_regions[static_cast<std::size_t>(g)];
      CHECK(p.x() >= reg.x_min);
      CHECK(p.x() <= reg.x_max);
      CHECK(p.z() == reg.z);
      const double d_ub = (p - scn.bs_positions[static_cast<std::size_t>(g)]).norm();
      const double d_ur = p.norm();
      const double d_rb = scn.bs_positions[static_cast<std::size_t>(g)].norm();
      // sqrt(T0 d_ub^-4 / (T0 d_rb^-2 T0 d_ur^-2)) written out.
      const double ref = std::sqrt(std::pow(d_ub, -4.0) / (1e-3 * std::pow(d_rb, -2.0) * std::pow(d_ur, -2.0)));
      CHECK(geo.user_eta[static_cast<std::size_t>(g * 2 + k)] == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("geometric: layout averages eta near 32") {
  const GeometryScenario scn = GeometryScenario::default_layout();
  const SystemConfig c = small_config(2, 2, 2, 1, 0.0);
  double sum = 0.0;
  const int placements = 10000;
  for (int p = 0; p < placements; ++p) {
    Rng rng(1000 + static_cast<std::uint64_t>(p));
    sum += sample_geometric(scn, c, rng).effective_eta;
  }
  const double mean = sum / placements;
  CHECK(mean >= 32.0 * 0.85);
  CHECK(mean <= 32.0 * 1.15);
}

TEST_CASE("geometric: invalid scenario rejected") {
  GeometryScenario scn = GeometryScenario::default_layout();
  scn.user_regions[0].x_max = scn.user_regions[0].x_min;
  Rng rng(15);
  CHECK_THROWS_AS(sample_geometric(scn, small_config(2, 2, 2, 4, 0.0), rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_geometric(GeometryScenario::default_layout(), small_config(3, 2, 2, 4, 0.0), rng),
                  std::invalid_argument);
}
