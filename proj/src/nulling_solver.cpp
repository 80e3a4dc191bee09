#include "risnull/nulling_solver.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace risnull {

PhaseVector::PhaseVector(CVector values) : v_(std::move(values)) {
  for (Index i = 0; i < v_.size(); ++i) {
    if (!(std::abs(std::abs(v_(i)) - 1.0) <= 1e-9)) {
      throw std::invalid_argument("PhaseVector entries must have unit modulus");
    }
  }
}

PhaseVector PhaseVector::ones(Index n) { return PhaseVector(CVector::Ones(n), Unchecked{}); }

PhaseVector PhaseVector::from_phases(const RVector& theta) {
  CVector v(theta.size());
  for (Index i = 0; i < theta.size(); ++i) v(i) = std::polar(1.0, theta(i));
  return PhaseVector(std::move(v), Unchecked{});
}

PhaseVector PhaseVector::random(Index n, Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  RVector theta(n);
  for (Index i = 0; i < n; ++i) theta(i) = angle(rng);
  return from_phases(theta);
}

RVector PhaseVector::phases() const {
  RVector out(v_.size());
  for (Index i = 0; i < v_.size(); ++i) out(i) = std::arg(v_(i));
  return out;
}

PhaseVector project_torus(const CVector& v) {
  CVector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    out(i) = m == 0.0 ? Complex(1.0, 0.0) : v(i) / m;
  }
  return PhaseVector(std::move(out), PhaseVector::Unchecked{});
}

double residual(const NullingSystem& sys, const CVector& v) {
  if (v.size() != sys.num_elements()) throw std::invalid_argument("residual: length mismatch");
  if (sys.num_conditions() == 0) return 0.0;
  return (sys.a.adjoint() * v + sys.b).norm();
}

double residual_scale(const NullingSystem& sys) {
  const double L = static_cast<double>(sys.num_conditions());
  const double N = static_cast<double>(sys.num_elements());
  const double s = sys.sigma4 * std::sqrt(N * L) + sys.sigma3 * std::sqrt(L);
  return s > 0.0 ? s : 1.0;
}

double residual_term_scale(const NullingSystem& sys) {
  const double N = static_cast<double>(sys.num_elements());
  const double s = sys.sigma4 * std::sqrt(N) + sys.sigma3;
  return s > 0.0 ? s : 1.0;
}

AffineProjector::AffineProjector(const NullingSystem& sys, double rank_tol)
    : ah_(sys.a.adjoint()), b_(sys.b) {
  if (sys.b.size() != sys.a.cols()) {
    throw std::invalid_argument("nulling system: b length differs from the column count of A");
  }
  pinv_ = pseudo_inverse(ah_, rank_tol, &rank_);
  rank_deficient_ = rank_ < ah_.rows();
}

CVector AffineProjector::constraint(const CVector& v) const { return ah_ * v + b_; }

CVector AffineProjector::project_with(const CVector& v, const CVector& r) const {
  return v - pinv_ * r;
}

CVector AffineProjector::project(const CVector& v) const {
  if (v.size() != ah_.cols()) throw std::invalid_argument("project_affine: length mismatch");
  if (ah_.rows() == 0) return v;
  return project_with(v, constraint(v));
}

AffineProjection project_affine(const CVector& v, const NullingSystem& sys) {
  AffineProjector proj(sys);
  return AffineProjection{proj.project(v), proj.rank_deficient()};
}

namespace {

struct Attempt {
  CVector v;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool feasible = false;
};

Attempt run_attempt(const AffineProjector& proj, CVector v, const SolverOptions& opts, double scale,
                    double term_scale, std::vector<double>* trace) {
  Attempt a;
  const double feas_abs = opts.eps_feas * scale;
  const double polish_abs = opts.polish_tol > 0.0 ? opts.polish_tol * scale : feas_abs;
  const double stop_abs = std::min(feas_abs, polish_abs);
  // Keep going until every single term, not just the norm, is within tolerance.
  const double term_abs = opts.eps_feas * term_scale;
  CVector r = proj.constraint(v);
  double res = r.norm();
  auto done = [&] { return res <= stop_abs && r.cwiseAbs().maxCoeff() <= term_abs; };
  int it = 0;
  while (!done() && it < opts.max_iters) {
    const CVector p = proj.project_with(v, r);
    if (trace) trace->push_back((v - p).norm());
    v = project_torus(p).values();
    r = proj.constraint(v);
    res = r.norm();
    ++it;
  }
  if (!std::isfinite(res)) throw NumericalError("alternating projection produced a non-finite residual");
  a.v = std::move(v);
  a.residual = res;
  a.iterations = it;
  a.feasible = res <= feas_abs;
  return a;
}

SolveOutcome finish(const Attempt& a, double scale) {
  SolveOutcome out;
  out.v = project_torus(a.v);
  out.residual = a.residual;
  out.normalized_residual = a.residual / scale;
  out.feasible = a.feasible;
  return out;
}

}  // namespace

SolveOutcome alternating_projection(const NullingSystem& sys, const SolverOptions& opts, Rng& rng) {
  const Index N = sys.num_elements();
  if (N < 1) throw std::invalid_argument("alternating projection needs N >= 1");
  if (sys.num_conditions() == 0) {
    SolveOutcome out;
    out.v = PhaseVector::random(N, rng);
    out.feasible = true;
    return out;
  }
  const AffineProjector proj(sys);
  const double scale = residual_scale(sys);
  const int attempts = std::max(1, opts.restarts);

  Attempt best;
  int total_iters = 0;
  int used = 0;
  std::vector<std::vector<double>> traces;
  for (int r = 0; r < attempts; ++r) {
    std::vector<double> trace;
    Attempt a = run_attempt(proj, PhaseVector::random(N, rng).values(), opts, scale,
                            residual_term_scale(sys), opts.record_trace ? &trace : nullptr);
    total_iters += a.iterations;
    ++used;
    if (opts.record_trace) traces.push_back(std::move(trace));
    const bool done = a.feasible;
    if (done || a.residual < best.residual) best = std::move(a);
    if (done) break;
  }
  SolveOutcome out = finish(best, scale);
  out.iterations = total_iters;
  out.restarts_used = used;
  out.rank_deficient = proj.rank_deficient();
  out.distance_traces = std::move(traces);
  return out;
}

SolveOutcome alternating_projection_from(const NullingSystem& sys, const PhaseVector& start,
                                         const SolverOptions& opts) {
  if (start.size() != sys.num_elements()) {
    throw std::invalid_argument("alternating projection start has the wrong length");
  }
  if (sys.num_conditions() == 0) {
    SolveOutcome out;
    out.v = start;
    out.feasible = true;
    return out;
  }
  const AffineProjector proj(sys);
  const double scale = residual_scale(sys);
  std::vector<double> trace;
  Attempt a = run_attempt(proj, start.values(), opts, scale, residual_term_scale(sys),
                          opts.record_trace ? &trace : nullptr);
  SolveOutcome out = finish(a, scale);
  out.iterations = a.iterations;
  out.restarts_used = 1;
  out.rank_deficient = proj.rank_deficient();
  if (opts.record_trace) out.distance_traces.push_back(std::move(trace));
  return out;
}

}  // namespace risnull
