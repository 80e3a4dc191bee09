#pragma once

#include "risnull/channel_model.hpp"
#include "risnull/numerics.hpp"

#include <vector>

namespace risnull {

/// N unit-modulus reflection coefficients.
class PhaseVector {
 public:
  PhaseVector() = default;
  /// Throws std::invalid_argument unless every entry has modulus 1 to 1e-9.
  explicit PhaseVector(CVector values);

  static PhaseVector ones(Index n);
  static PhaseVector from_phases(const RVector& theta);
  static PhaseVector random(Index n, Rng& rng);

  const CVector& values() const { return v_; }
  Index size() const { return v_.size(); }
  RVector phases() const;

 private:
  struct Unchecked {};
  PhaseVector(CVector values, Unchecked) : v_(std::move(values)) {}
  friend PhaseVector project_torus(const CVector& v);
  CVector v_;
};

/// Elementwise nearest unit-modulus point; zero entries map to 1.
PhaseVector project_torus(const CVector& v);

/// |A^H v + b|.
double residual(const NullingSystem& sys, const CVector& v);

/// Residual scale sigma4 sqrt(N L) + sigma3 sqrt(L): a torus point with
/// random phases has |A^H v + b| of about this size.
double residual_scale(const NullingSystem& sys);

/// Per-term scale sigma4 sqrt(N) + sigma3. A run only stops once every
/// |(A^H v + b)_l| is below eps_feas times this, which also bounds the norm.
double residual_term_scale(const NullingSystem& sys);

struct AffineProjection {
  CVector point;
  bool rank_deficient = false;
};

/// Euclidean projection of v onto S1 = {v : A^H v + b = 0}. When A^H is rank
/// deficient and b is outside its range, the target is the least-squares
/// affine set and the result is flagged.
AffineProjection project_affine(const CVector& v, const NullingSystem& sys);

/// Caches (A^H)^+ so that each projection costs two matrix-vector products.
class AffineProjector {
 public:
  explicit AffineProjector(const NullingSystem& sys, double rank_tol = kDefaultRankTol);

  CVector project(const CVector& v) const;
  /// A^H v + b.
  CVector constraint(const CVector& v) const;
  /// v - (A^H)^+ r, given r = A^H v + b already evaluated.
  CVector project_with(const CVector& v, const CVector& r) const;

  bool rank_deficient() const { return rank_deficient_; }
  Index rank() const { return rank_; }

 private:
  CMatrix ah_;
  CMatrix pinv_;
  CVector b_;
  Index rank_ = 0;
  bool rank_deficient_ = false;
};

struct SolverOptions {
  int max_iters = 2000;
  double eps_feas = 1e-5;
  int restarts = 3;
  // When > 0, a feasible run keeps iterating until the normalized residual
  // drops below this value (or max_iters is hit). Used to hand an accurately
  // nulled point to the rate optimizer.
  double polish_tol = 0.0;
  bool record_trace = false;
};

struct SolveOutcome {
  PhaseVector v;
  double residual = 0.0;
  double normalized_residual = 0.0;
  int iterations = 0;  // summed over restarts
  int restarts_used = 0;
  bool feasible = false;
  bool rank_deficient = false;
  // Per iteration |v_t - P_S1(v_t)| of every attempt, when requested.
  std::vector<std::vector<double>> distance_traces;
};

/// Alternating projection v <- P_S2(P_S1(v)) from random unit-modulus
/// starts. Declares the system feasible once |A^H v + b| / residual_scale
/// drops to eps_feas; otherwise returns the best point over all restarts.
SolveOutcome alternating_projection(const NullingSystem& sys, const SolverOptions& opts, Rng& rng);

/// Same iteration from a caller-provided start (single attempt).
SolveOutcome alternating_projection_from(const NullingSystem& sys, const PhaseVector& start,
                                         const SolverOptions& opts);

}  // namespace risnull
