#pragma once

#include "risnull/channel_model.hpp"
#include "risnull/numerics.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace risnull {

/// Inputs of the closed-form element-count thresholds.
struct ThresholdConfig {
  Index L = 1;
  double eta = 0.0;
  double c = -0.5;              // slope offset of the refined threshold
  double c1 = 2.0;              // tail constants of the extreme-value bound
  double c2 = 2.0;
  std::optional<double> c_bar;  // additive correction; defaults to L

  double correction() const { return c_bar.value_or(static_cast<double>(L)); }
  void validate() const;
};

/// Round half up, as used for reporting integer element counts.
std::int64_t round_half_up(double x);

// Norm-concentration necessary condition on the torus.
double necessary_n_gordon(Index L, double eta);
/// Discarded second branch of the torus bound; defined only for L >= 4 pi eta^2.
std::optional<double> necessary_n_gordon_rejected_branch(Index L, double eta);

// Sphere-relaxation quantities: 50% intersection point, sphere necessary
// condition, and the approximate sufficient condition 2 n1 - n2.
double n1(Index L, double eta);
double n2(Index L, double eta);
double sufficient_n(Index L, double eta);

struct MomentReport {
  double mean_b_sum = 0.0;
  double var_b_sum = 0.0;
  double mean_a_sum = 0.0;
  double var_a_sum = 0.0;
};

/// Means and variances of sum_i |b_i| and sum_j |sum_i a_ij|.
MomentReport evs_moments(Index L, Index N, double sigma3, double sigma4);

struct EvsThreshold {
  double full = 0.0;       // complete root of the two-tail inequality
  double large_eta = 0.0;  // (sqrt(L) + c) eta
  double corrected = 0.0;  // (sqrt(L) + c) eta + c_bar
  bool domain_error = false;
};

EvsThreshold necessary_n_evs(const ThresholdConfig& cfg, double eta);
/// The offset c implied by the tail constant c1: -c1 sqrt(4/pi - 1).
double c_from_c1(double c1);

/// max{2L, (sqrt(L) + c) eta + L}.
double refined_threshold(Index L, double eta, double c = -0.5);
/// eta at which the two branches of the refined threshold meet: L / (sqrt(L) + c).
double transition_eta(Index L, double c = -0.5);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Expected min / max of |G x| over the unit-modulus torus (lower clamped at 0).
Interval gordon_bounds_torus(Index L, Index N, double sigma);
/// Same over the sphere x^H x = N.
Interval gordon_bounds_sphere(Index L, Index N, double sigma);

struct ThresholdReport {
  Index L = 0;
  double eta = 0.0;
  double n_necessary_gordon = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double n_sufficient = 0.0;
  double n_necessary_evs = 0.0;
  double n_necessary_evs_large_eta = 0.0;
  double n_necessary_evs_corrected = 0.0;
  double n_refined = 0.0;
  double eta_transition = 0.0;
  bool evs_domain_error = false;
};

ThresholdReport threshold_report(const ThresholdConfig& cfg);

/// Full DoF without an RIS needs M >= K G.
bool antenna_collab_feasible(int G, int M, int K);

// Empirical checks of the concentration results. Trials use seeds derived
// from `seed`, run on `workers` threads, and give identical results for
// any worker count.

struct GordonValidation {
  Index L = 0;
  Index N = 0;
  double sigma = 1.0;
  int trials = 0;
  double torus_mean_min = 0.0, torus_se_min = 0.0;
  double torus_mean_max = 0.0, torus_se_max = 0.0;
  Interval torus_bound;
  double sphere_mean_min = 0.0, sphere_se_min = 0.0;
  double sphere_mean_max = 0.0, sphere_se_max = 0.0;
  Interval sphere_bound;
  int nonconverged = 0;
  bool torus_ok = false;
  bool sphere_ok = false;
};

/// Torus extremes estimated by manifold ascent on +|Gx|^2 and -|Gx|^2 from
/// several random starts; sphere extremes from the singular values.
GordonValidation validate_theorem2(Index L, Index N, double sigma, int trials, std::uint64_t seed,
                                   int workers = 1, int restarts = 4);

struct NormValidation {
  int trials = 0;
  double empirical_mean = 0.0;
  double standard_error = 0.0;
  double reference = 0.0;   // the stated expectation or bound
  double exact_mean = 0.0;  // exact expectation when known
  bool passed = false;
};

/// E|x| for x ~ CN(0, sigma^2 I_L) against sigma sqrt(L).
NormValidation validate_theorem3(Index L, double sigma, int trials, std::uint64_t seed,
                                 int workers = 1);
/// E|G^+ x| against sqrt(L / (N - L - 1)) rho; requires N > L + 1.
NormValidation validate_theorem4(Index L, Index N, double rho, int trials, std::uint64_t seed,
                                 int workers = 1);

struct RankEvidence {
  int trials = 0;
  Index expected_desired = 0;    // min{M, K}
  Index expected_intercell = 0;  // min{M, K(G-1)}
  int desired_violations = 0;
  int intercell_violations = 0;
  Index min_desired = 0, max_desired = 0;
  Index min_intercell = 0, max_intercell = 0;
};

/// Ranks of the per-cell desired-plus-intra matrix and the inter-cell matrix
/// seen by each BS, over random channels and random phases.
RankEvidence rank_evidence(const SystemConfig& config, int trials, std::uint64_t seed,
                           double tol = kDefaultRankTol);

/// Per-cell receive combiners u_ik (columns of an M x K matrix).
struct DecoderBank {
  std::vector<CMatrix> U;
};

/// Combiners with U_i^H [desired/intra | inter-cell] = [I 0] in the
/// least-squares sense; exact when M >= K G.
DecoderBank zero_forcing_decoders(const ChannelRealization& real, const CVector& v);
/// Largest |u_ik^H v_gj| over all interfering (g, j) relative to the
/// smallest desired |u_ik^H v_ik|.
double decoder_leakage(const ChannelRealization& real, const CVector& v, const DecoderBank& bank);

}  // namespace risnull
