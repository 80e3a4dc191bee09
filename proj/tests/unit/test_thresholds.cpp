#include "risnull/thresholds.hpp"

#include "risnull/nulling_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace risnull;

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);

// Every real output of the report, in a fixed order.
std::vector<double> report_values(Index L, double eta) {
  ThresholdConfig cfg;
  cfg.L = L;
  cfg.eta = eta;
  const ThresholdReport r = threshold_report(cfg);
  return {r.n_necessary_gordon, r.n1, r.n2, r.n_sufficient, r.n_necessary_evs_large_eta,
          r.n_necessary_evs_corrected, r.n_refined};
}

}  // namespace

TEST_CASE("rounding is half up") {
  CHECK(round_half_up(162.5) == 163);
  CHECK(round_half_up(162.4999) == 162);
  CHECK(round_half_up(390.98) == 391);
  CHECK(round_half_up(0.0) == 0);
}

TEST_CASE("two-cell thresholds at eta = 32") {
  struct Row {
    Index L;
    std::int64_t necessary, sufficient;
  };
  for (const Row& r : {Row{56, 163, 391}, Row{90, 194, 528}, Row{132, 222, 677}}) {
    CAPTURE(r.L);
    CHECK(round_half_up(necessary_n_gordon(r.L, 32.0)) == r.necessary);
    CHECK(round_half_up(sufficient_n(r.L, 32.0)) == r.sufficient);
  }
  CHECK(necessary_n_gordon(56, 32.0) == doctest::Approx(162.6).epsilon(5e-4));
  CHECK(sufficient_n(56, 32.0) == doctest::Approx(390.98).epsilon(1e-4));
  CHECK(necessary_n_gordon(90, 32.0) == doctest::Approx(193.6).epsilon(5e-4));
  CHECK(necessary_n_gordon(132, 32.0) == doctest::Approx(221.8).epsilon(5e-4));
  CHECK(sufficient_n(90, 32.0) == doctest::Approx(527.7).epsilon(2e-4));
  CHECK(sufficient_n(132, 32.0) == doctest::Approx(676.6).epsilon(2e-4));
}

TEST_CASE("n1 and n2 cross-check at L = 56, eta = 32") {
  // Frozen from a long-double evaluation of the closed forms.
  const long double l = 56.0L, e = 32.0L;
  const long double n1_ref = (l + 1.0L + std::sqrt((l + 1.0L) * (l + 1.0L) + 4.0L * l * e * e)) / 2.0L;
  const long double r2 = (-std::sqrt(l) + std::sqrt(l + 4.0L * std::sqrt(l) * e)) / 2.0L;
  CHECK(n1(56, 32.0) == doctest::Approx(static_cast<double>(n1_ref)).epsilon(1e-14));
  CHECK(n2(56, 32.0) == doctest::Approx(static_cast<double>(r2 * r2)).epsilon(1e-14));
  CHECK(std::abs(n1(56, 32.0) - 269.65) < 0.01);
  CHECK(std::abs(n2(56, 32.0) - 148.33) < 0.01);
}

TEST_CASE("eta = 0 collapses to the no-direct-link counts") {
  for (Index L : {1, 12, 56, 400}) {
    CHECK(necessary_n_gordon(L, 0.0) == 0.0);
    CHECK(n1(L, 0.0) == doctest::Approx(static_cast<double>(L + 1)));
    CHECK(n2(L, 0.0) == 0.0);
    CHECK(sufficient_n(L, 0.0) == doctest::Approx(2.0 * static_cast<double>(L + 1)));
    CHECK(refined_threshold(L, 0.0, -0.5) == 2.0 * static_cast<double>(L));
  }
}

TEST_CASE("torus bound branches are roots of their quadratics") {
  // sqrt(pi) r^2 + 2 sqrt(L) r - 2 sqrt(L) eta = 0 and
  // sqrt(pi) r^2 - 2 sqrt(L) r + 2 sqrt(L) eta = 0 with r = sqrt(N).
  for (Index L : {12, 56, 132}) {
    const double sl = std::sqrt(static_cast<double>(L));
    for (double eta : {0.0, 0.3, 1.0, 5.0, 32.0}) {
      const double r = std::sqrt(necessary_n_gordon(L, eta));
      CHECK(kSqrtPi * r * r + 2.0 * sl * r - 2.0 * sl * eta == doctest::Approx(0.0).scale(1.0));
      const auto alt = necessary_n_gordon_rejected_branch(L, eta);
      CHECK(alt.has_value() == (static_cast<double>(L) >= 4.0 * std::numbers::pi * eta * eta));
      if (alt) {
        const double q = std::sqrt(*alt);
        CHECK(kSqrtPi * q * q - 2.0 * sl * q + 2.0 * sl * eta == doctest::Approx(0.0).scale(1.0));
        CHECK(*alt >= necessary_n_gordon(L, eta));
      }
    }
  }
  CHECK(*necessary_n_gordon_rejected_branch(56, 0.0) == doctest::Approx(4.0 * 56.0 / std::numbers::pi));
}

TEST_CASE("argument checks") {
  CHECK_THROWS_AS(necessary_n_gordon(0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(n1(4, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(sufficient_n(4, std::nan("")), std::invalid_argument);
  ThresholdConfig cfg;
  cfg.L = 4;
  cfg.c1 = 0.0;
  CHECK_THROWS_AS(threshold_report(cfg), std::invalid_argument);
  CHECK_THROWS_AS(transition_eta(1, -1.0), std::invalid_argument);
}

TEST_CASE("extreme-value moments") {
  const MomentReport m = evs_moments(4, 10, 2.0, 1.0);
  CHECK(m.mean_b_sum == doctest::Approx(7.0898).epsilon(1e-4));
  CHECK(m.var_b_sum == doctest::Approx(3.4336).epsilon(1e-4));
  const MomentReport eq = evs_moments(9, 9, 1.5, 1.5);
  CHECK(eq.mean_a_sum / eq.mean_b_sum == doctest::Approx(3.0));
  CHECK(eq.var_a_sum >= 0.0);
  CHECK_THROWS_AS(evs_moments(0, 4, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("extreme-value moments against sampling") {
  const Index L = 8, N = 32;
  const int draws = 100000;
  Rng rng(42);
  double sb = 0.0, sbb = 0.0, sa = 0.0, saa = 0.0;
  for (int t = 0; t < draws; ++t) {
    const double bsum = sample_complex_gaussian_vector(L, 1.0, rng).cwiseAbs().sum();
    const CMatrix a = sample_complex_gaussian(L, N, 1.0, rng);
    const double asum = a.colwise().sum().cwiseAbs().sum();
    sb += bsum;
    sbb += bsum * bsum;
    sa += asum;
    saa += asum * asum;
  }
  const double mb = sb / draws, ma = sa / draws;
  const double vb = sbb / draws - mb * mb, va = saa / draws - ma * ma;
  const MomentReport m = evs_moments(L, N, 1.0, 1.0);
  CHECK(mb == doctest::Approx(m.mean_b_sum).epsilon(0.02));
  CHECK(vb == doctest::Approx(m.var_b_sum).epsilon(0.02));
  CHECK(ma == doctest::Approx(m.mean_a_sum).epsilon(0.02));
  CHECK(va == doctest::Approx(m.var_a_sum).epsilon(0.02));
}

TEST_CASE("extreme-value threshold forms") {
  ThresholdConfig zero;
  zero.L = 56;
  zero.c1 = 0.0;
  zero.c2 = 0.0;
  for (double eta : {0.0, 1.0, 32.0}) {
    CHECK(necessary_n_evs(zero, eta).full == doctest::Approx(std::sqrt(56.0) * eta));
  }

  ThresholdConfig cfg;
  cfg.L = 56;
  const EvsThreshold e = necessary_n_evs(cfg, 50.0);
  CHECK(e.corrected == doctest::Approx(405.2).epsilon(1e-4));
  CHECK(e.large_eta == doctest::Approx((std::sqrt(56.0) - 0.5) * 50.0));
  CHECK_FALSE(e.domain_error);
  cfg.c_bar = 10.0;
  CHECK(necessary_n_evs(cfg, 50.0).corrected == doctest::Approx(e.large_eta + 10.0));

  // A slope below zero with large eta makes the discriminant negative.
  ThresholdConfig neg;
  neg.L = 1;
  neg.c1 = 4.0;
  neg.c2 = 0.1;
  const EvsThreshold bad = necessary_n_evs(neg, 100.0);
  CHECK(bad.domain_error);
  CHECK(std::isnan(bad.full));
  neg.eta = 100.0;
  CHECK(threshold_report(neg).evs_domain_error);
}

TEST_CASE("full extreme-value threshold tracks its large-eta form") {
  ThresholdConfig cfg;
  cfg.c = c_from_c1(cfg.c1);
  for (Index L : {56, 90, 132}) {
    cfg.L = L;
    const double sl = std::sqrt(static_cast<double>(L));
    for (int s = 0; s <= 20; ++s) {
      const double eta = sl * (10.0 + 4.5 * s);
      const EvsThreshold e = necessary_n_evs(cfg, eta);
      CAPTURE(L);
      CAPTURE(eta);
      CHECK(std::abs(e.full - e.large_eta) <= 0.05 * e.large_eta);
    }
  }
  CHECK(c_from_c1(2.0) == doctest::Approx(-2.0 * std::sqrt(4.0 / std::numbers::pi - 1.0)));
}

TEST_CASE("refined threshold and transition") {
  CHECK(transition_eta(56, -0.5) == doctest::Approx(8.02).epsilon(1e-3));
  CHECK(refined_threshold(12, 10.0, -0.5) == doctest::Approx(41.64).epsilon(1e-3));
  const double t = transition_eta(12, -0.5);
  CHECK(refined_threshold(12, 0.99 * t, -0.5) == 24.0);
  CHECK(refined_threshold(12, t, -0.5) == doctest::Approx(24.0));
  CHECK(refined_threshold(12, 1.01 * t, -0.5) > 24.0);
}

TEST_CASE("every threshold is non-decreasing in eta and in L") {
  std::vector<Index> Ls;
  for (int i = 1; i <= 20; ++i) Ls.push_back(static_cast<Index>(i * i + 3 * i));
  std::vector<double> etas;
  for (int j = 0; j < 20; ++j) etas.push_back(5.0 * j);
  for (std::size_t i = 0; i < Ls.size(); ++i) {
    for (std::size_t j = 0; j < etas.size(); ++j) {
      const std::vector<double> here = report_values(Ls[i], etas[j]);
      for (double x : here) CHECK(x >= 0.0);
      if (j + 1 < etas.size()) {
        const std::vector<double> up = report_values(Ls[i], etas[j + 1]);
        for (std::size_t q = 0; q < here.size(); ++q) CHECK(up[q] >= here[q]);
      }
      if (i + 1 < Ls.size()) {
        const std::vector<double> up = report_values(Ls[i + 1], etas[j]);
        for (std::size_t q = 0; q < here.size(); ++q) CHECK(up[q] >= here[q]);
      }
      CHECK(report_values(Ls[i], etas[j])[6] >= 2.0 * static_cast<double>(Ls[i]));
    }
  }
}

TEST_CASE("necessary <= refined <= sufficient in the large-eta band") {
  for (int n = 3; n <= 22; ++n) {
    const Index L = n * (n - 1);
    const double sl = std::sqrt(static_cast<double>(L));
    for (int s = 0; s < 20; ++s) {
      const double eta = sl * (10.0 + 5.0 * s / 19.0);
      CAPTURE(L);
      CAPTURE(eta);
      const double refined = refined_threshold(L, eta, -0.5);
      CHECK(necessary_n_gordon(L, eta) <= refined);
      CHECK(refined <= sufficient_n(L, eta));
    }
  }
}

TEST_CASE("norm bounds: closed forms") {
  const Interval t = gordon_bounds_torus(100, 4, 1.0);
  CHECK(t.lower == doctest::Approx(16.455).epsilon(1e-4));
  CHECK(t.upper == doctest::Approx(23.545).epsilon(1e-4));
  CHECK(gordon_bounds_sphere(9, 9, 1.0).lower == 0.0);
  CHECK(gordon_bounds_torus(2, 16, 1.0).lower == 0.0);
  for (Index L : {1, 2, 10, 50}) {
    for (Index N : {1, 3, 8, 40}) {
      const Interval a = gordon_bounds_torus(L, N, 1.3);
      const Interval b = gordon_bounds_sphere(L, N, 1.3);
      CHECK(a.lower >= b.lower);
      CHECK(a.upper <= b.upper);
    }
  }
}

TEST_CASE("antenna collaboration criterion") {
  CHECK_FALSE(antenna_collab_feasible(2, 4, 4));
  CHECK(antenna_collab_feasible(2, 4, 2));
  for (int M = 1; M <= 8; ++M) {
    for (int K = 1; K <= M; ++K) CHECK(antenna_collab_feasible(1, M, K));
  }
  CHECK_THROWS_AS(antenna_collab_feasible(0, 1, 1), std::invalid_argument);
}

TEST_CASE("torus norm validator: L = 2, N = 8") {
  const GordonValidation v = validate_theorem2(2, 8, 1.0, 100, 7);
  CHECK(v.torus_ok);
  CHECK(v.sphere_ok);
  CHECK(v.torus_mean_min <= v.torus_mean_max);
  CHECK(v.sphere_mean_max >= v.torus_mean_max - 1e-9);
}

TEST_CASE("torus norm validator: single element") {
  // |G x| = |g| for every unit-modulus scalar x.
  const GordonValidation v = validate_theorem2(3, 1, 1.0, 20, 8);
  CHECK(v.torus_mean_min == doctest::Approx(v.sphere_mean_max).epsilon(1e-9));
  CHECK(v.torus_mean_max == doctest::Approx(v.sphere_mean_max).epsilon(1e-9));
  CHECK(v.sphere_mean_min == doctest::Approx(v.sphere_mean_max).epsilon(1e-12));
}

TEST_CASE("torus norm validator: homogeneous in sigma and worker-independent") {
  const GordonValidation a = validate_theorem2(2, 4, 1.0, 30, 9);
  const GordonValidation b = validate_theorem2(2, 4, 2.0, 30, 9);
  CHECK(b.sphere_mean_max == doctest::Approx(2.0 * a.sphere_mean_max).epsilon(1e-12));
  CHECK(b.torus_mean_max == doctest::Approx(2.0 * a.torus_mean_max).epsilon(1e-4));
  CHECK(b.torus_mean_min == doctest::Approx(2.0 * a.torus_mean_min).epsilon(1e-3));
  const GordonValidation c = validate_theorem2(2, 4, 1.0, 30, 9, 3);
  CHECK(c.torus_mean_min == a.torus_mean_min);
  CHECK(c.torus_mean_max == a.torus_mean_max);
}

TEST_CASE("Gaussian norm validator") {
  const NormValidation v = validate_theorem3(100, 1.0, 10000, 10);
  CHECK(v.empirical_mean >= 9.9);
  CHECK(v.empirical_mean <= 10.1);
  CHECK(v.passed);
  CHECK(v.exact_mean == doctest::Approx(10.0 - 1.0 / 80.0).epsilon(1e-4));
  const NormValidation small = validate_theorem3(4, 1.0, 10000, 11);
  CHECK(small.passed);
  const NormValidation twice = validate_theorem3(100, 2.0, 10000, 10);
  CHECK(twice.empirical_mean == doctest::Approx(2.0 * v.empirical_mean).epsilon(1e-12));
  CHECK_THROWS_AS(validate_theorem3(0, 1.0, 10, 0), std::invalid_argument);
}

TEST_CASE("pseudoinverse norm validator") {
  const NormValidation v = validate_theorem4(10, 100, 1.0, 10000, 12);
  CHECK(v.reference == doctest::Approx(0.3352).epsilon(1e-4));
  CHECK(v.passed);
  CHECK(v.empirical_mean <= v.reference + v.standard_error);
  // Independent second moment check: E|G^+ x|^2 = L / (N - L).
  CHECK(std::abs(v.empirical_mean - v.exact_mean) <= 3.0 * v.standard_error + 0.01 * v.exact_mean);
  const NormValidation twice = validate_theorem4(10, 100, 2.0, 10000, 12);
  CHECK(twice.empirical_mean == doctest::Approx(2.0 * v.empirical_mean).epsilon(1e-12));
  CHECK_THROWS_AS(validate_theorem4(10, 11, 1.0, 10, 0), std::invalid_argument);
  CHECK_NOTHROW(validate_theorem4(10, 12, 1.0, 10, 0));
  const NormValidation w3 = validate_theorem4(10, 100, 1.0, 500, 12, 3);
  const NormValidation w1 = validate_theorem4(10, 100, 1.0, 500, 12, 1);
  CHECK(w3.empirical_mean == w1.empirical_mean);
}

TEST_CASE("rank evidence") {
  SystemConfig c;
  c.cells = 2;
  c.antennas = 4;
  c.users = 4;
  c.elements = 32;
  c.eta = 1.0;
  const RankEvidence r = rank_evidence(c, 100, 13);
  CHECK(r.expected_desired == 4);
  CHECK(r.expected_intercell == 4);
  CHECK(r.desired_violations == 0);
  CHECK(r.intercell_violations == 0);
  CHECK(r.min_desired == 4);
  CHECK(r.max_intercell == 4);

  c.eta = 0.0;
  const RankEvidence cascade_only = rank_evidence(c, 50, 14);
  CHECK(cascade_only.desired_violations == 0);
  CHECK(cascade_only.intercell_violations == 0);

  c.antennas = 1;
  const RankEvidence m1 = rank_evidence(c, 20, 15);
  CHECK(m1.expected_desired == 1);
  CHECK(m1.expected_intercell == 1);
  CHECK(m1.desired_violations == 0);

  c.cells = 1;
  c.antennas = 4;
  const RankEvidence g1 = rank_evidence(c, 10, 16);
  CHECK(g1.expected_intercell == 0);
  CHECK(g1.intercell_violations == 0);
}

TEST_CASE("zero-forcing decoders cancel interference when M >= KG") {
  SystemConfig c;
  c.cells = 2;
  c.antennas = 4;
  c.users = 2;
  c.elements = 16;
  c.eta = 1.0;
  Rng rng(17);
  const ChannelRealization real = sample_channels(c, rng);
  const CVector v = PhaseVector::random(16, rng).values();
  const DecoderBank bank = zero_forcing_decoders(real, v);
  REQUIRE(bank.U.size() == 2);
  CHECK(bank.U[0].rows() == 4);
  CHECK(bank.U[0].cols() == 2);
  CHECK(decoder_leakage(real, v, bank) < 1e-10);

  // Too few antennas: interference remains.
  c.antennas = 2;
  c.users = 2;
  const ChannelRealization small = sample_channels(c, rng);
  const CVector w = PhaseVector::random(16, rng).values();
  CHECK(decoder_leakage(small, w, zero_forcing_decoders(small, w)) > 1e-3);
}
