#include "risnull/thresholds.hpp"

#include "risnull/manifold_optimizer.hpp"
#include "risnull/nulling_solver.hpp"
#include "risnull/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risnull {

namespace {

const double kSqrtPi = std::sqrt(std::numbers::pi);
// Variance of a unit Rayleigh amplitude relative to its squared mean.
const double kRayleighK = 4.0 / std::numbers::pi - 1.0;

void check_l_eta(Index L, double eta) {
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be finite and >= 0");
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x) {
  MeanSe out;
  if (x.empty()) return out;
  double s = 0.0;
  for (double v : x) s += v;
  out.mean = s / static_cast<double>(x.size());
  if (x.size() < 2) return out;
  double ss = 0.0;
  for (double v : x) ss += (v - out.mean) * (v - out.mean);
  const double var = ss / static_cast<double>(x.size() - 1);
  out.se = std::sqrt(var / static_cast<double>(x.size()));
  return out;
}

}  // namespace

void ThresholdConfig::validate() const {
  check_l_eta(L, eta);
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("c1 and c2 must be > 0");
  if (!std::isfinite(c)) throw std::invalid_argument("c must be finite");
  if (c_bar && !std::isfinite(*c_bar)) throw std::invalid_argument("c_bar must be finite");
}

std::int64_t round_half_up(double x) {
  return static_cast<std::int64_t>(std::floor(x + 0.5));
}

double necessary_n_gordon(Index L, double eta) {
  check_l_eta(L, eta);
  const double sl = std::sqrt(static_cast<double>(L));
  const double root = (-sl + std::sqrt(static_cast<double>(L) + 2.0 * kSqrtPi * sl * eta)) / kSqrtPi;
  return root * root;
}

std::optional<double> necessary_n_gordon_rejected_branch(Index L, double eta) {
  check_l_eta(L, eta);
  const double l = static_cast<double>(L);
  if (l < 4.0 * std::numbers::pi * eta * eta) return std::nullopt;
  const double sl = std::sqrt(l);
  const double root = (sl + std::sqrt(std::max(0.0, l - 2.0 * kSqrtPi * sl * eta))) / kSqrtPi;
  return root * root;
}

double n1(Index L, double eta) {
  check_l_eta(L, eta);
  const double l = static_cast<double>(L);
  return (l + 1.0 + std::sqrt((l + 1.0) * (l + 1.0) + 4.0 * l * eta * eta)) / 2.0;
}

double n2(Index L, double eta) {
  check_l_eta(L, eta);
  const double sl = std::sqrt(static_cast<double>(L));
  const double root = (-sl + std::sqrt(static_cast<double>(L) + 4.0 * sl * eta)) / 2.0;
  return root * root;
}

double sufficient_n(Index L, double eta) { return 2.0 * n1(L, eta) - n2(L, eta); }

MomentReport evs_moments(Index L, Index N, double sigma3, double sigma4) {
  if (L < 1 || N < 1) throw std::invalid_argument("evs_moments: L and N must be >= 1");
  if (!(sigma3 >= 0.0) || !(sigma4 >= 0.0)) throw std::invalid_argument("evs_moments: negative std");
  const double l = static_cast<double>(L);
  const double n = static_cast<double>(N);
  MomentReport m;
  m.mean_b_sum = l * (kSqrtPi / 2.0) * sigma3;
  m.var_b_sum = l * (1.0 - std::numbers::pi / 4.0) * sigma3 * sigma3;
  m.mean_a_sum = n * (kSqrtPi / 2.0) * std::sqrt(l) * sigma4;
  m.var_a_sum = n * (1.0 - std::numbers::pi / 4.0) * l * sigma4 * sigma4;
  return m;
}

double c_from_c1(double c1) { return -c1 * std::sqrt(kRayleighK); }

EvsThreshold necessary_n_evs(const ThresholdConfig& cfg, double eta) {
  check_l_eta(cfg.L, eta);
  const double sl = std::sqrt(static_cast<double>(cfg.L));
  const double sk = std::sqrt(kRayleighK);
  EvsThreshold out;

  const double slope = sl - cfg.c1 * sk;
  const double c2k = cfg.c2 * cfg.c2 * kRayleighK;
  const double disc = c2k + 4.0 * slope * eta;
  if (disc < 0.0) {
    out.domain_error = true;
    out.full = std::numeric_limits<double>::quiet_NaN();
  } else {
    out.full = c2k / 2.0 + slope * eta - cfg.c2 * sk * std::sqrt(disc) / 2.0;
  }
  out.large_eta = (sl + cfg.c) * eta;
  out.corrected = out.large_eta + cfg.correction();
  return out;
}

double refined_threshold(Index L, double eta, double c) {
  check_l_eta(L, eta);
  const double l = static_cast<double>(L);
  return std::max(2.0 * l, (std::sqrt(l) + c) * eta + l);
}

double transition_eta(Index L, double c) {
  if (L < 1) throw std::invalid_argument("L must be >= 1");
  const double l = static_cast<double>(L);
  const double slope = std::sqrt(l) + c;
  if (!(slope > 0.0)) throw std::invalid_argument("transition_eta needs sqrt(L) + c > 0");
  return l / slope;
}

Interval gordon_bounds_torus(Index L, Index N, double sigma) {
  if (L < 1 || N < 1) throw std::invalid_argument("gordon bounds need L, N >= 1");
  const double sl = std::sqrt(static_cast<double>(L));
  const double sn = std::sqrt(static_cast<double>(N));
  const double w = kSqrtPi / 2.0 * sn;
  return {std::max(0.0, sigma * sn * (sl - w)), sigma * sn * (sl + w)};
}

Interval gordon_bounds_sphere(Index L, Index N, double sigma) {
  if (L < 1 || N < 1) throw std::invalid_argument("gordon bounds need L, N >= 1");
  const double sl = std::sqrt(static_cast<double>(L));
  const double sn = std::sqrt(static_cast<double>(N));
  return {std::max(0.0, sigma * sn * (sl - sn)), sigma * sn * (sl + sn)};
}

ThresholdReport threshold_report(const ThresholdConfig& cfg) {
  cfg.validate();
  ThresholdReport r;
  r.L = cfg.L;
  r.eta = cfg.eta;
  r.n_necessary_gordon = necessary_n_gordon(cfg.L, cfg.eta);
  r.n1 = n1(cfg.L, cfg.eta);
  r.n2 = n2(cfg.L, cfg.eta);
  r.n_sufficient = 2.0 * r.n1 - r.n2;
  const EvsThreshold evs = necessary_n_evs(cfg, cfg.eta);
  r.n_necessary_evs = evs.domain_error ? evs.full : std::max(0.0, evs.full);
  r.evs_domain_error = evs.domain_error;
  r.n_necessary_evs_large_eta = std::max(0.0, evs.large_eta);
  r.n_necessary_evs_corrected = std::max(0.0, evs.corrected);
  r.n_refined = refined_threshold(cfg.L, cfg.eta, cfg.c);
  r.eta_transition = transition_eta(cfg.L, cfg.c);
  return r;
}

bool antenna_collab_feasible(int G, int M, int K) {
  if (G < 1 || M < 1 || K < 1) throw std::invalid_argument("G, M, K must be >= 1");
  return M >= K * G;
}

GordonValidation validate_theorem2(Index L, Index N, double sigma, int trials, std::uint64_t seed,
                                   int workers, int restarts) {
  if (trials < 1) throw std::invalid_argument("validate_theorem2: trials must be >= 1");
  if (restarts < 1) throw std::invalid_argument("validate_theorem2: restarts must be >= 1");
  GordonValidation rep;
  rep.L = L;
  rep.N = N;
  rep.sigma = sigma;
  rep.trials = trials;
  rep.torus_bound = gordon_bounds_torus(L, N, sigma);
  rep.sphere_bound = gordon_bounds_sphere(L, N, sigma);

  const auto t = static_cast<std::size_t>(trials);
  std::vector<double> tmin(t), tmax(t), smin(t), smax(t);
  std::vector<int> bad(t, 0);
  RcgOptions opts;
  opts.eps = 1e-10;
  opts.max_iters = 2000;

  parallel_for(t, workers, [&](std::size_t idx) {
    Rng rng(derive_trial_seed(seed, 0, idx));
    const CMatrix G = sample_complex_gaussian(L, N, sigma * sigma, rng);
    const CMatrix gram = G.adjoint() * G;

    Eigen::JacobiSVD<CMatrix> svd(G);
    const RVector& s = svd.singularValues();
    const double sn = std::sqrt(static_cast<double>(N));
    smax[idx] = sn * s(0);
    smin[idx] = N <= L ? sn * s(s.size() - 1) : 0.0;

    auto make = [&gram](double sign) {
      return ManifoldObjective{
          [&gram, sign](const CVector& x) { return sign * (x.dot(gram * x)).real(); },
          [&gram, sign](const CVector& x) -> CVector { return 2.0 * sign * (gram * x); },
      };
    };
    const ManifoldObjective up = make(1.0);
    const ManifoldObjective down = make(-1.0);

    double best_max = 0.0;
    double best_min = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
      const PhaseVector start = PhaseVector::random(N, rng);
      const RcgResult hi = rcg_maximize(up, start, opts);
      const RcgResult lo = rcg_maximize(down, start, opts);
      if (!hi.converged || !lo.converged) ++bad[idx];
      best_max = std::max(best_max, hi.state.value);
      best_min = std::min(best_min, -lo.state.value);
    }
    tmax[idx] = std::sqrt(std::max(0.0, best_max));
    tmin[idx] = std::sqrt(std::max(0.0, best_min));
  });

  const MeanSe a = mean_se(tmin), b = mean_se(tmax), c = mean_se(smin), d = mean_se(smax);
  rep.torus_mean_min = a.mean;
  rep.torus_se_min = a.se;
  rep.torus_mean_max = b.mean;
  rep.torus_se_max = b.se;
  rep.sphere_mean_min = c.mean;
  rep.sphere_se_min = c.se;
  rep.sphere_mean_max = d.mean;
  rep.sphere_se_max = d.se;
  for (int v : bad) rep.nonconverged += v;

  rep.torus_ok = rep.torus_mean_min >= rep.torus_bound.lower - rep.torus_se_min &&
                 rep.torus_mean_max <= rep.torus_bound.upper + rep.torus_se_max;
  rep.sphere_ok = rep.sphere_mean_min >= rep.sphere_bound.lower - rep.sphere_se_min &&
                  rep.sphere_mean_max <= rep.sphere_bound.upper + rep.sphere_se_max;
  return rep;
}

NormValidation validate_theorem3(Index L, double sigma, int trials, std::uint64_t seed, int workers) {
  if (L < 1) throw std::invalid_argument("validate_theorem3: L must be >= 1");
  if (trials < 2) throw std::invalid_argument("validate_theorem3: trials must be >= 2");
  const auto t = static_cast<std::size_t>(trials);
  std::vector<double> norms(t);
  parallel_for(t, workers, [&](std::size_t idx) {
    Rng rng(derive_trial_seed(seed, 0, idx));
    norms[idx] = sample_complex_gaussian_vector(L, sigma * sigma, rng).norm();
  });
  const MeanSe m = mean_se(norms);
  NormValidation rep;
  rep.trials = trials;
  rep.empirical_mean = m.mean;
  rep.standard_error = m.se;
  const double l = static_cast<double>(L);
  rep.reference = sigma * std::sqrt(l);
  rep.exact_mean = sigma * std::exp(std::lgamma(l + 0.5) - std::lgamma(l));
  // sigma sqrt(L) is only asymptotic; below L = 25 test against the exact mean.
  if (L >= 25) {
    rep.passed = std::abs(rep.empirical_mean - rep.reference) <= 0.01 * rep.reference;
  } else {
    rep.passed = std::abs(rep.empirical_mean - rep.exact_mean) <= 3.0 * rep.standard_error;
  }
  return rep;
}

NormValidation validate_theorem4(Index L, Index N, double rho, int trials, std::uint64_t seed,
                                 int workers) {
  if (L < 1) throw std::invalid_argument("validate_theorem4: L must be >= 1");
  if (N <= L + 1) {
    throw std::invalid_argument("validate_theorem4: bound undefined for N <= L + 1 (N=" +
                                std::to_string(N) + ", L=" + std::to_string(L) + ")");
  }
  if (trials < 2) throw std::invalid_argument("validate_theorem4: trials must be >= 2");
  const auto t = static_cast<std::size_t>(trials);
  std::vector<double> norms(t);
  parallel_for(t, workers, [&](std::size_t idx) {
    Rng rng(derive_trial_seed(seed, 0, idx));
    const CMatrix G = sample_complex_gaussian(L, N, 1.0, rng);
    const CVector x = sample_complex_gaussian_vector(L, rho * rho, rng);
    norms[idx] = least_norm_solve(G, x).x.norm();
  });
  const MeanSe m = mean_se(norms);
  NormValidation rep;
  rep.trials = trials;
  rep.empirical_mean = m.mean;
  rep.standard_error = m.se;
  const double l = static_cast<double>(L);
  const double n = static_cast<double>(N);
  rep.reference = std::sqrt(l / (n - l - 1.0)) * rho;
  // E|G^+ x|^2 = rho^2 L / (N - L); the mean norm is slightly below its root.
  rep.exact_mean = std::sqrt(l / (n - l)) * rho;
  rep.passed = rep.empirical_mean <= rep.reference + rep.standard_error;
  return rep;
}

namespace {

CVector effective_channel(const ChannelRealization& real, const CVector& v, int bs, int cell,
                          int user) {
  return cascade(real.H(bs), real.h_ris(cell, user)) * v + real.h_direct(bs, cell, user);
}

}  // namespace

RankEvidence rank_evidence(const SystemConfig& config, int trials, std::uint64_t seed, double tol) {
  config.validate();
  if (trials < 1) throw std::invalid_argument("rank_evidence: trials must be >= 1");
  const int G = config.cells, M = config.antennas, K = config.users;
  RankEvidence rep;
  rep.trials = trials;
  rep.expected_desired = std::min(M, K);
  rep.expected_intercell = std::min(M, K * (G - 1));
  rep.min_desired = rep.min_intercell = std::numeric_limits<Index>::max();
  rep.max_desired = rep.max_intercell = 0;

  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_trial_seed(seed, 0, static_cast<std::uint64_t>(t)));
    const ChannelRealization real = sample_channels(config, rng);
    const CVector v = PhaseVector::random(config.elements, rng).values();
    for (int i = 0; i < G; ++i) {
      CMatrix own(M, K);
      CMatrix other(M, K * (G - 1));
      int col = 0;
      for (int g = 0; g < G; ++g) {
        for (int j = 0; j < K; ++j) {
          const CVector h = effective_channel(real, v, i, g, j);
          if (g == i) {
            own.col(j) = h;
          } else {
            other.col(col++) = h;
          }
        }
      }
      const Index r_own = numerical_rank(own, tol);
      const Index r_other = other.cols() > 0 ? numerical_rank(other, tol) : 0;
      if (r_own != rep.expected_desired) ++rep.desired_violations;
      if (r_other != rep.expected_intercell) ++rep.intercell_violations;
      rep.min_desired = std::min(rep.min_desired, r_own);
      rep.max_desired = std::max(rep.max_desired, r_own);
      rep.min_intercell = std::min(rep.min_intercell, r_other);
      rep.max_intercell = std::max(rep.max_intercell, r_other);
    }
  }
  return rep;
}

DecoderBank zero_forcing_decoders(const ChannelRealization& real, const CVector& v) {
  const int G = real.cells, M = real.antennas, K = real.users;
  if (v.size() != real.elements) throw std::invalid_argument("zero_forcing_decoders: length mismatch");
  DecoderBank bank;
  for (int i = 0; i < G; ++i) {
    // Own-cell users first, then the other cells in order.
    CMatrix x(M, K * G);
    int col = K;
    for (int g = 0; g < G; ++g) {
      for (int j = 0; j < K; ++j) {
        const CVector h = effective_channel(real, v, i, g, j);
        if (g == i) {
          x.col(j) = h;
        } else {
          x.col(col++) = h;
        }
      }
    }
    const CMatrix pinv = pseudo_inverse(x);  // (KG) x M
    CMatrix u = pinv.topRows(K).adjoint();   // M x K
    for (int k = 0; k < K; ++k) {
      if (u.col(k).norm() == 0.0) {
        throw NumericalError("zero_forcing_decoders: zero combiner for cell " + std::to_string(i) +
                             " user " + std::to_string(k));
      }
    }
    bank.U.push_back(std::move(u));
  }
  return bank;
}

double decoder_leakage(const ChannelRealization& real, const CVector& v, const DecoderBank& bank) {
  const int G = real.cells, K = real.users;
  if (static_cast<int>(bank.U.size()) != G) throw std::invalid_argument("decoder_leakage: bank size");
  double worst = 0.0;
  double weakest = std::numeric_limits<double>::infinity();
  for (int i = 0; i < G; ++i) {
    const CMatrix& U = bank.U[static_cast<std::size_t>(i)];
    for (int k = 0; k < K; ++k) {
      for (int g = 0; g < G; ++g) {
        for (int j = 0; j < K; ++j) {
          const double mag = std::abs(U.col(k).dot(effective_channel(real, v, i, g, j)));
          if (g == i && j == k) {
            weakest = std::min(weakest, mag);
          } else {
            worst = std::max(worst, mag);
          }
        }
      }
    }
  }
  return weakest > 0.0 ? worst / weakest : std::numeric_limits<double>::infinity();
}

}  // namespace risnull
