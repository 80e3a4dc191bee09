#include "risnull/manifold_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace risnull {

namespace {

constexpr double kLn2 = std::numbers::ln2;

void check_inputs(const RateInputs& in, Index n) {
  if (!(in.noise_variance > 0.0)) throw std::invalid_argument("noise variance must be > 0");
  if (n != in.elements) throw std::invalid_argument("phase vector length differs from N");
}

struct PairPowers {
  CVector coef;
  RVector total;         // per receiver, desired + interference + noise
  RVector interference;  // per receiver, interference + noise
};

PairPowers evaluate(const RateInputs& in, const CVector& v) {
  const Index R = in.num_receivers();
  const Index S = in.num_sources();
  PairPowers p;
  p.coef = in.cascade_rows * v + in.direct;
  p.total = RVector::Constant(R, in.noise_variance);
  p.interference = RVector::Constant(R, in.noise_variance);
  for (Index r = 0; r < R; ++r) {
    const int d = in.desired_source[static_cast<std::size_t>(r)];
    for (Index s = 0; s < S; ++s) {
      const double rx = in.source_power(s) * std::norm(p.coef(r * S + s));
      p.total(r) += rx;
      if (s != d) p.interference(r) += rx;
    }
  }
  return p;
}

RVector desired_gains(const RateInputs& in, const CVector& v) {
  const CVector coef = in.cascade_rows * v + in.direct;
  const Index R = in.num_receivers();
  const Index S = in.num_sources();
  RVector gain(R);
  for (Index r = 0; r < R; ++r) {
    gain(r) = std::norm(coef(r * S + in.desired_source[static_cast<std::size_t>(r)]));
  }
  return gain;
}

}  // namespace

RateInputs RateInputs::with_uniform_power(double power) const {
  RateInputs out = *this;
  for (Index s = 0; s < out.source_power.size(); ++s) out.source_power(s) = power;
  return out;
}

RateInputs make_rate_inputs(const ChannelRealization& real, const PowerAllocation& powers,
                            double noise_variance) {
  const int G = real.cells;
  RateInputs in;
  in.cells = G;
  in.elements = real.elements;
  in.noise_variance = noise_variance;

  std::vector<std::vector<int>> active(static_cast<std::size_t>(G));
  for (int g = 0; g < G; ++g) {
    active[static_cast<std::size_t>(g)] = powers.active_users(g);
    for (int j : active[static_cast<std::size_t>(g)]) {
      in.source_cell.push_back(g);
      in.source_user.push_back(j);
    }
  }
  const Index S = in.num_sources();
  in.source_power.resize(S);
  for (Index s = 0; s < S; ++s) {
    in.source_power(s) = powers.at(in.source_cell[static_cast<std::size_t>(s)],
                                   in.source_user[static_cast<std::size_t>(s)]);
  }

  int first_source = 0;
  std::vector<std::pair<int, int>> receivers;  // (cell, antenna)
  for (int i = 0; i < G; ++i) {
    const int streams =
        std::min<int>(real.antennas, static_cast<int>(active[static_cast<std::size_t>(i)].size()));
    for (int k = 0; k < streams; ++k) {
      receivers.emplace_back(i, k);
      in.receiver_cell.push_back(i);
      in.desired_source.push_back(first_source + k);
    }
    first_source += static_cast<int>(active[static_cast<std::size_t>(i)].size());
  }

  const Index R = in.num_receivers();
  in.cascade_rows.resize(R * S, real.elements);
  in.direct.resize(R * S);
  for (Index r = 0; r < R; ++r) {
    const auto [i, k] = receivers[static_cast<std::size_t>(r)];
    const CVector hconj = real.H(i).col(k).conjugate();
    for (Index s = 0; s < S; ++s) {
      const int g = in.source_cell[static_cast<std::size_t>(s)];
      const int j = in.source_user[static_cast<std::size_t>(s)];
      in.cascade_rows.row(r * S + s) = hconj.cwiseProduct(real.h_ris(g, j)).transpose();
      in.direct(r * S + s) = real.h_direct(i, g, j)(k);
    }
  }
  return in;
}

RateReport sum_rate(const RateInputs& in, const PhaseVector& v) {
  check_inputs(in, v.size());
  const PairPowers p = evaluate(in, v.values());
  const Index R = in.num_receivers();
  RateReport rep;
  rep.cell_rate.assign(static_cast<std::size_t>(in.cells), 0.0);
  for (Index r = 0; r < R; ++r) {
    const double rate = std::log2(p.total(r) / p.interference(r));
    rep.user_rate.push_back(rate);
    rep.desired_power.push_back(p.total(r) - p.interference(r));
    rep.interference_power.push_back(p.interference(r) - in.noise_variance);
    rep.sum_rate += rate;
    rep.cell_rate[static_cast<std::size_t>(in.receiver_cell[static_cast<std::size_t>(r)])] += rate;
  }
  return rep;
}

double sum_rate_value(const RateInputs& in, const CVector& v) {
  check_inputs(in, v.size());
  const PairPowers p = evaluate(in, v);
  double w = 0.0;
  for (Index r = 0; r < in.num_receivers(); ++r) w += std::log2(p.total(r) / p.interference(r));
  return w;
}

CVector euclidean_gradient(const RateInputs& in, const CVector& v) {
  check_inputs(in, v.size());
  const PairPowers p = evaluate(in, v);
  const Index R = in.num_receivers();
  const Index S = in.num_sources();
  CVector weights(R * S);
  for (Index r = 0; r < R; ++r) {
    const int d = in.desired_source[static_cast<std::size_t>(r)];
    const double inv_total = 1.0 / p.total(r);
    const double inv_interf = 1.0 / p.interference(r);
    for (Index s = 0; s < S; ++s) {
      const double w = s == d ? inv_total : inv_total - inv_interf;
      weights(r * S + s) = in.source_power(s) * w * p.coef(r * S + s);
    }
  }
  return (2.0 / kLn2) * (in.cascade_rows.adjoint() * weights);
}

CVector riemannian_gradient(const CVector& egrad, const CVector& v) {
  if (egrad.size() != v.size()) throw std::invalid_argument("riemannian_gradient: length mismatch");
  const RVector radial = egrad.cwiseProduct(v.conjugate()).real();
  return egrad - radial.cast<Complex>().cwiseProduct(v);
}

CVector transport(const CVector& d_prev, const CVector& v_new) {
  return riemannian_gradient(d_prev, v_new);
}

PhaseVector retract(const CVector& v, double step, const CVector& dir) {
  if (dir.size() != v.size()) throw std::invalid_argument("retract: length mismatch");
  return project_torus(v + step * dir);
}

ManifoldObjective sum_rate_objective(const RateInputs& in) {
  return ManifoldObjective{
      [&in](const CVector& v) { return sum_rate_value(in, v); },
      [&in](const CVector& v) { return euclidean_gradient(in, v); },
  };
}

RcgResult rcg_maximize(const ManifoldObjective& f, const PhaseVector& v0, const RcgOptions& opts) {
  RcgResult res;
  CVector v = v0.values();
  double w = f.value(v);
  if (!std::isfinite(w)) throw NumericalError("RCG: objective is not finite at the start point");
  CVector g = riemannian_gradient(f.euclidean_gradient(v), v);
  CVector d = g;
  res.trace.push_back(w);

  int iter = 0;
  auto stationary = [&](const CVector& grad) {
    return grad.norm() <= 1e-14 * (std::abs(w) + 1.0);
  };
  if (stationary(g)) {
    res.converged = true;
    res.stop_reason = "zero gradient";
    iter = 1;
  }

  while (!res.converged && iter < opts.max_iters) {
    ++iter;
    double slope = real_inner(g, d);
    if (!(slope > 0.0)) {
      d = g;
      slope = g.squaredNorm();
      ++res.restarts;
    }

    double step = opts.initial_step;
    bool accepted = false;
    CVector v_new;
    double w_new = w;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      v_new = retract(v, step, d).values();
      w_new = f.value(v_new);
      if (!std::isfinite(w_new)) {
        throw NumericalError("RCG: non-finite objective after step " + std::to_string(step) +
                             " at iteration " + std::to_string(iter));
      }
      if (w_new >= w + opts.armijo_c * step * slope) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      if ((d - g).norm() > 0.0) {
        d = g;
        ++res.restarts;
        continue;
      }
      res.converged = true;
      res.stop_reason = "line search stalled";
      break;
    }

    const CVector g_new = riemannian_gradient(f.euclidean_gradient(v_new), v_new);
    const CVector g_moved = transport(g, v_new);
    const CVector d_moved = transport(d, v_new);
    const double denom = g.squaredNorm();
    double beta = denom > 0.0 ? real_inner(g_new, g_new - g_moved) / denom : 0.0;
    beta = std::max(0.0, beta);
    d = g_new + beta * d_moved;

    const double change = std::abs(w_new - w);
    const double base = std::abs(w);
    v = std::move(v_new);
    g = g_new;
    w = w_new;
    res.trace.push_back(w);
    if (stationary(g)) {
      res.converged = true;
      res.stop_reason = "zero gradient";
      break;
    }
    if (change <= opts.eps * (base > 0.0 ? base : 1.0)) {
      res.converged = true;
      res.stop_reason = "relative change below eps";
      break;
    }
  }
  if (!res.converged) res.stop_reason = "max iterations";

  res.state.v = project_torus(v);
  res.state.grad = g;
  res.state.dir = d;
  res.state.value = w;
  res.state.iter = iter;
  return res;
}

RcgResult rcg_maximize(const RateInputs& in, const PhaseVector& v0, const RcgOptions& opts) {
  check_inputs(in, v0.size());
  return rcg_maximize(sum_rate_objective(in), v0, opts);
}

double mean_desired_gain(const RateInputs& in, const CVector& v) {
  check_inputs(in, v.size());
  return in.num_receivers() > 0 ? desired_gains(in, v).mean() : 0.0;
}

DofEstimate estimate_dof(const RateInputs& in, const PhaseVector& v, double snr_low,
                         double snr_high) {
  check_inputs(in, v.size());
  if (!(snr_high > snr_low) || !(snr_low > 0.0)) {
    throw std::invalid_argument("estimate_dof needs 0 < snr_low < snr_high");
  }
  DofEstimate est;
  est.cell_dof.assign(static_cast<std::size_t>(in.cells), 0.0);

  const RVector gain = desired_gains(in, v.values());
  const Index R = in.num_receivers();
  const double mean_gain = R > 0 ? gain.mean() : 0.0;
  if (!(mean_gain > 0.0)) {
    est.low_confidence = true;
    return est;
  }
  est.power_low = snr_low * in.noise_variance / mean_gain;
  est.power_high = snr_high * in.noise_variance / mean_gain;

  const RateReport lo = sum_rate(in.with_uniform_power(est.power_low), v);
  const RateReport hi = sum_rate(in.with_uniform_power(est.power_high), v);
  const double log_ratio = std::log2(est.power_high / est.power_low);
  for (Index r = 0; r < R; ++r) {
    const double snr_r_low = gain(r) * est.power_low / in.noise_variance;
    if (snr_r_low < 10.0) est.low_confidence = true;
    const double slope = (hi.user_rate[static_cast<std::size_t>(r)] -
                          lo.user_rate[static_cast<std::size_t>(r)]) /
                         log_ratio;
    est.cell_dof[static_cast<std::size_t>(in.receiver_cell[static_cast<std::size_t>(r)])] += slope;
    est.total += slope;
  }
  if (snr_high / snr_low < 10.0) est.low_confidence = true;
  return est;
}

}  // namespace risnull
