#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace risnull {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Seeded generator used throughout. Every sampling routine takes one
/// explicitly; there is no hidden global stream.
using Rng = std::mt19937_64;

/// Raised when an iterative routine produces a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultRankTol = 1e-10;

/// Circularly-symmetric complex Gaussian entries with total variance
/// `variance` (real and imaginary parts each carry variance/2).
CMatrix sample_complex_gaussian(Index rows, Index cols, double variance, Rng& rng);
CVector sample_complex_gaussian_vector(Index len, double variance, Rng& rng);

struct LeastNormSolution {
  CVector x;
  Index rank = 0;
  bool rank_deficient = false;
  // False when r is not in the range of A; x is then the minimum-norm
  // least-squares solution.
  bool consistent = true;
  double residual = 0.0;
};

/// Minimum-norm solution of A x = r for a wide system (rows < cols),
/// computed through a complete orthogonal decomposition.
LeastNormSolution least_norm_solve(const CMatrix& a, const CVector& r,
                                   double rank_tol = kDefaultRankTol);

/// Number of singular values above tol * (largest singular value).
Index numerical_rank(const CMatrix& a, double tol = kDefaultRankTol);

/// Moore-Penrose pseudoinverse via complete orthogonal decomposition.
/// `rank` receives the detected rank when non-null.
CMatrix pseudo_inverse(const CMatrix& a, double rank_tol = kDefaultRankTol,
                       Index* rank = nullptr);

void require_finite(const CMatrix& a, const char* what);
void require_finite(const CVector& a, const char* what);

/// Real inner product re(a^H b) on C^n viewed as R^{2n}.
inline double real_inner(const CVector& a, const CVector& b) {
  return a.dot(b).real();
}

}  // namespace risnull
