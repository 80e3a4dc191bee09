#pragma once

#include "risnull/channel_model.hpp"
#include "risnull/nulling_solver.hpp"
#include "risnull/numerics.hpp"

#include <functional>
#include <string>
#include <vector>

namespace risnull {

/// Effective scalar channels for every (receiver, source) pair. Receiver r is
/// antenna k of BS i decoding its k-th active user; sources are all active
/// users. The coefficient of pair (r, s) is row(r*S + s) * v + direct(r*S + s).
struct RateInputs {
  int cells = 0;
  Index elements = 0;
  std::vector<int> receiver_cell;   // size R
  std::vector<int> desired_source;  // size R
  std::vector<int> source_cell;     // size S
  std::vector<int> source_user;     // size S
  RVector source_power;             // size S, watts
  CMatrix cascade_rows;             // (R*S) x N
  CVector direct;                   // R*S
  double noise_variance = 1.0;

  Index num_receivers() const { return static_cast<Index>(receiver_cell.size()); }
  Index num_sources() const { return static_cast<Index>(source_cell.size()); }
  /// Every active source set to `power` watts.
  RateInputs with_uniform_power(double power) const;
};

RateInputs make_rate_inputs(const ChannelRealization& realization, const PowerAllocation& powers,
                            double noise_variance);

struct RateReport {
  std::vector<double> user_rate;  // bits/s/Hz, per receiver
  std::vector<double> desired_power;
  std::vector<double> interference_power;
  double sum_rate = 0.0;
  std::vector<double> cell_rate;
};

RateReport sum_rate(const RateInputs& in, const PhaseVector& v);
double sum_rate_value(const RateInputs& in, const CVector& v);

/// Gradient of the sum rate with the 2/ln 2 scaling: the directional
/// derivative of W along a perturbation d is re(gradient^H d).
CVector euclidean_gradient(const RateInputs& in, const CVector& v);

/// egrad - re(egrad o conj(v)) o v.
CVector riemannian_gradient(const CVector& egrad, const CVector& v);
/// Same projection applied to a previous search direction at the new point.
CVector transport(const CVector& d_prev, const CVector& v_new);
/// Elementwise normalization of v + step * dir.
PhaseVector retract(const CVector& v, double step, const CVector& dir);

/// Ratio between euclidean_gradient and measured directional derivatives
/// under the re(g^H d) pairing. Frozen by the gradient calibration test.
inline constexpr double kGradientConvention = 1.0;

/// Smooth function on the phase manifold with its Euclidean gradient.
struct ManifoldObjective {
  std::function<double(const CVector&)> value;
  std::function<CVector(const CVector&)> euclidean_gradient;
};

ManifoldObjective sum_rate_objective(const RateInputs& in);

struct RcgOptions {
  double eps = 1e-3;
  int max_iters = 500;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo_c = 1e-4;
  int max_backtracks = 30;
};

struct OptimizerState {
  PhaseVector v;
  CVector grad;
  CVector dir;
  double value = 0.0;
  int iter = 0;
};

struct RcgResult {
  OptimizerState state;
  std::vector<double> trace;  // objective value after every accepted step, starting at v0
  bool converged = false;
  int restarts = 0;           // steepest-ascent resets of the direction
  std::string stop_reason;
};

/// Riemannian conjugate gradient ascent: projected gradient, Polak-Ribiere
/// (clamped at zero) direction, Armijo backtracking on the retraction.
/// Stops when |W_{t+1} - W_t| / |W_t| <= eps.
RcgResult rcg_maximize(const ManifoldObjective& f, const PhaseVector& v0, const RcgOptions& opts = {});
RcgResult rcg_maximize(const RateInputs& in, const PhaseVector& v0, const RcgOptions& opts = {});

struct DofEstimate {
  std::vector<double> cell_dof;
  double total = 0.0;
  bool low_confidence = false;
  double power_low = 0.0;
  double power_high = 0.0;
};

/// Mean |c_r|^2 over desired links at v; power-independent.
double mean_desired_gain(const RateInputs& in, const CVector& v);

/// Rate slope against log2 SNR between two power levels at fixed v. The
/// grid is given as mean received SNR of the desired links; the matching
/// per-user power is derived from the channel gains at v.
DofEstimate estimate_dof(const RateInputs& in, const PhaseVector& v, double snr_low = 1e3,
                         double snr_high = 1e6);

}  // namespace risnull
