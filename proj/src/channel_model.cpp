#include "risnull/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace risnull {

double SystemConfig::direct_std() const {
  if (sigma3) return *sigma3;
  if (eta) return *eta * sigma4();
  return 0.0;
}

double SystemConfig::strength_ratio() const {
  if (eta) return *eta;
  const double s4 = sigma4();
  return s4 > 0.0 ? direct_std() / s4 : 0.0;
}

Index SystemConfig::nulling_rows() const {
  const Index gm = static_cast<Index>(cells) * antennas;
  return gm * (gm - 1);
}

void SystemConfig::validate() const {
  if (cells < 1 || antennas < 1 || users < 1 || elements < 1) {
    throw std::invalid_argument("G, M, K and N must all be >= 1");
  }
  auto nonneg = [](double x, const char* name) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
    }
  };
  nonneg(sigma1, "sigma1");
  nonneg(sigma2, "sigma2");
  if (sigma3 && eta) throw std::invalid_argument("set either sigma3 or eta, not both");
  if (sigma3) nonneg(*sigma3, "sigma3");
  if (eta) nonneg(*eta, "eta");
  nonneg(power_per_user, "power_per_user");
  if (!(noise_variance > 0.0)) throw std::invalid_argument("noise_variance must be > 0");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");
}

const CVector& ChannelRealization::h_ris(int cell, int user) const {
  return user_to_ris.at(static_cast<std::size_t>(cell * users + user));
}

const CVector& ChannelRealization::h_direct(int bs, int cell, int user) const {
  return user_to_bs.at(static_cast<std::size_t>((bs * cells + cell) * users + user));
}

std::vector<int> PowerAllocation::active_users(int cell) const {
  std::vector<int> out;
  for (int k = 0; k < users; ++k) {
    if (active(cell, k)) out.push_back(k);
  }
  return out;
}

PowerAllocation PowerAllocation::active_subset(const SystemConfig& config, Rng* rng) {
  PowerAllocation p;
  p.cells = config.cells;
  p.users = config.users;
  p.power.assign(static_cast<std::size_t>(config.cells * config.users), 0.0);
  const int active = std::min(config.antennas, config.users);
  std::vector<int> order(static_cast<std::size_t>(config.users));
  for (int g = 0; g < config.cells; ++g) {
    std::iota(order.begin(), order.end(), 0);
    if (config.random_active_users && config.users > active) {
      if (!rng) throw std::invalid_argument("random active-user selection needs a generator");
      std::shuffle(order.begin(), order.end(), *rng);
      std::sort(order.begin(), order.begin() + active);
    }
    for (int a = 0; a < active; ++a) {
      p.power[static_cast<std::size_t>(g * config.users + order[static_cast<std::size_t>(a)])] =
          config.power_per_user;
    }
  }
  return p;
}

double path_loss(double distance, double t0, double alpha) {
  if (!(distance > 0.0)) throw std::invalid_argument("path loss needs a positive distance");
  return t0 * std::pow(distance, -alpha);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

ChannelRealization sample_channels(const SystemConfig& config, Rng& rng) {
  config.validate();
  ChannelRealization r;
  r.cells = config.cells;
  r.antennas = config.antennas;
  r.users = config.users;
  r.elements = config.elements;
  const double var1 = config.sigma1 * config.sigma1;
  const double var2 = config.sigma2 * config.sigma2;
  const double s3 = config.direct_std();
  const double var3 = s3 * s3;

  r.ris_to_bs.reserve(static_cast<std::size_t>(config.cells));
  for (int i = 0; i < config.cells; ++i) {
    r.ris_to_bs.push_back(sample_complex_gaussian(config.elements, config.antennas, var1, rng));
  }
  for (int g = 0; g < config.cells; ++g) {
    for (int k = 0; k < config.users; ++k) {
      r.user_to_ris.push_back(sample_complex_gaussian_vector(config.elements, var2, rng));
    }
  }
  for (int i = 0; i < config.cells; ++i) {
    for (int g = 0; g < config.cells; ++g) {
      for (int k = 0; k < config.users; ++k) {
        r.user_to_bs.push_back(sample_complex_gaussian_vector(config.antennas, var3, rng));
      }
    }
  }
  return r;
}

CMatrix cascade(const CMatrix& ris_to_bs, const CVector& user_to_ris) {
  if (ris_to_bs.rows() != user_to_ris.size()) {
    throw std::invalid_argument("cascade: H has " + std::to_string(ris_to_bs.rows()) +
                                " rows but h has " + std::to_string(user_to_ris.size()) +
                                " entries");
  }
  return ris_to_bs.adjoint() * user_to_ris.asDiagonal();
}

NullingSystem assemble_nulling_system(const ChannelRealization& realization,
                                      const PowerAllocation& powers,
                                      const SystemConfig& config) {
  const int G = config.cells;
  const int M = config.antennas;
  if (realization.cells != G || realization.antennas != M || realization.users != config.users ||
      realization.elements != config.elements) {
    throw std::invalid_argument("realization dimensions do not match the config");
  }
  if (powers.cells != G || powers.users != config.users) {
    throw std::invalid_argument("power allocation dimensions do not match the config");
  }
  std::vector<std::vector<int>> active(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) {
    active[static_cast<std::size_t>(g)] = powers.active_users(g);
    if (static_cast<int>(active[static_cast<std::size_t>(g)].size()) != M) {
      throw std::invalid_argument("cell " + std::to_string(g) + " has " +
                                  std::to_string(active[static_cast<std::size_t>(g)].size()) +
                                  " active users; nulling needs exactly M = " + std::to_string(M));
    }
  }

  const Index L = config.nulling_rows();
  const Index N = realization.elements;
  NullingSystem sys;
  sys.a.resize(N, L);
  sys.b.resize(L);
  sys.rows.reserve(static_cast<std::size_t>(L));
  sys.sigma4 = config.sigma4();
  sys.sigma3 = config.direct_std();

  int c = 0;
  for (int i = 0; i < G; ++i) {
    const CMatrix& H = realization.H(i);
    for (int k = 0; k < M; ++k) {
      const int decoded = active[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      for (int g = 0; g < G; ++g) {
        for (int j : active[static_cast<std::size_t>(g)]) {
          if (g == i && j == decoded) continue;
          // conj(column) so that column^H v = sum_n conj(H[n,k]) h[n] v[n].
          sys.a.col(c) = H.col(k).cwiseProduct(realization.h_ris(g, j).conjugate());
          sys.b(c) = realization.h_direct(i, g, j)(k);
          sys.rows.push_back(NullingLink{c, i, k, decoded, g, j});
          ++c;
        }
      }
    }
  }
  return sys;
}

NullingSystem surrogate_system(Index conditions, Index elements, double sigma3, double sigma4,
                               Rng& rng) {
  if (conditions < 0 || elements < 1) {
    throw std::invalid_argument("surrogate system needs L >= 0 and N >= 1");
  }
  NullingSystem sys;
  sys.a = sample_complex_gaussian(elements, conditions, sigma4 * sigma4, rng);
  sys.b = sample_complex_gaussian_vector(conditions, sigma3 * sigma3, rng);
  sys.sigma3 = sigma3;
  sys.sigma4 = sigma4;
  sys.rows.resize(static_cast<std::size_t>(conditions));
  for (Index c = 0; c < conditions; ++c) sys.rows[static_cast<std::size_t>(c)].ordinal = static_cast<int>(c);
  return sys;
}

GeometryScenario GeometryScenario::default_layout() {
  GeometryScenario s;
  s.ris_position = Eigen::Vector3d::Zero();
  s.bs_positions = {Eigen::Vector3d(15.0, 15.0, 0.0), Eigen::Vector3d(40.0, 15.0, 0.0)};
  s.user_regions = {Region{5.0, 25.0, -25.0, -5.0, -20.0}, Region{30.0, 50.0, -25.0, -5.0, -20.0}};
  s.t0 = db_to_linear(-30.0);
  s.alpha_reflect = 2.0;
  s.alpha_direct = 4.0;
  return s;
}

void GeometryScenario::validate(int cells) const {
  if (static_cast<int>(bs_positions.size()) != cells ||
      static_cast<int>(user_regions.size()) != cells) {
    throw std::invalid_argument("geometry needs one BS position and one user region per cell");
  }
  if (!(alpha_reflect > 0.0) || !(alpha_direct > 0.0)) {
    throw std::invalid_argument("path loss exponents must be > 0");
  }
  if (!(t0 > 0.0)) throw std::invalid_argument("reference loss T0 must be > 0");
  for (const Region& r : user_regions) {
    if (!(r.x_max > r.x_min) || !(r.y_max > r.y_min)) {
      throw std::invalid_argument("user region is degenerate");
    }
  }
}

GeometricRealization sample_geometric(const GeometryScenario& scn, const SystemConfig& config,
                                      Rng& rng) {
  config.validate();
  scn.validate(config.cells);
  const int G = config.cells;
  const int K = config.users;
  const Index N = config.elements;

  GeometricRealization out;
  ChannelRealization& r = out.channels;
  r.cells = G;
  r.antennas = config.antennas;
  r.users = K;
  r.elements = N;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  out.user_positions.reserve(static_cast<std::size_t>(G * K));
  for (int g = 0; g < G; ++g) {
    const Region& reg = scn.user_regions[static_cast<std::size_t>(g)];
    for (int k = 0; k < K; ++k) {
      const double x = reg.x_min + (reg.x_max - reg.x_min) * unit(rng);
      const double y = reg.y_min + (reg.y_max - reg.y_min) * unit(rng);
      out.user_positions.emplace_back(x, y, reg.z);
    }
  }

  std::vector<double> loss_rb(static_cast<std::size_t>(G));
  for (int i = 0; i < G; ++i) {
    const double d = (scn.bs_positions[static_cast<std::size_t>(i)] - scn.ris_position).norm();
    loss_rb[static_cast<std::size_t>(i)] = path_loss(d, scn.t0, scn.alpha_reflect);
    r.ris_to_bs.push_back(
        sample_complex_gaussian(N, config.antennas, loss_rb[static_cast<std::size_t>(i)], rng));
  }
  std::vector<double> loss_ur(static_cast<std::size_t>(G * K));
  for (int g = 0; g < G; ++g) {
    for (int k = 0; k < K; ++k) {
      const std::size_t u = static_cast<std::size_t>(g * K + k);
      const double d = (out.user_positions[u] - scn.ris_position).norm();
      loss_ur[u] = path_loss(d, scn.t0, scn.alpha_reflect);
      r.user_to_ris.push_back(sample_complex_gaussian_vector(N, loss_ur[u], rng));
    }
  }
  double cascade_var_sum = 0.0;
  double direct_var_sum = 0.0;
  int links = 0;
  out.user_eta.assign(static_cast<std::size_t>(G * K), 0.0);
  for (int i = 0; i < G; ++i) {
    for (int g = 0; g < G; ++g) {
      for (int k = 0; k < K; ++k) {
        const std::size_t u = static_cast<std::size_t>(g * K + k);
        const double d =
            (out.user_positions[u] - scn.bs_positions[static_cast<std::size_t>(i)]).norm();
        const double loss_ub = path_loss(d, scn.t0, scn.alpha_direct);
        r.user_to_bs.push_back(sample_complex_gaussian_vector(config.antennas, loss_ub, rng));
        const double cascade_var = loss_rb[static_cast<std::size_t>(i)] * loss_ur[u];
        cascade_var_sum += cascade_var;
        direct_var_sum += loss_ub;
        ++links;
        if (i == g) out.user_eta[u] = std::sqrt(loss_ub / cascade_var);
      }
    }
  }
  out.effective_eta = std::accumulate(out.user_eta.begin(), out.user_eta.end(), 0.0) /
                      static_cast<double>(out.user_eta.size());
  out.cascade_rms = std::sqrt(cascade_var_sum / links);
  out.direct_rms = std::sqrt(direct_var_sum / links);
  return out;
}

}  // namespace risnull
