#include "risnull/numerics.hpp"

#include <cmath>
#include <string>

namespace risnull {

namespace {

void fill_gaussian(Complex* data, Index count, double variance, Rng& rng) {
  if (variance < 0.0 || !std::isfinite(variance)) {
    throw std::invalid_argument("complex Gaussian variance must be finite and >= 0, got " +
                                std::to_string(variance));
  }
  if (variance == 0.0) {
    for (Index i = 0; i < count; ++i) data[i] = Complex(0.0, 0.0);
    return;
  }
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  for (Index i = 0; i < count; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    data[i] = Complex(re, im);
  }
}

}  // namespace

CMatrix sample_complex_gaussian(Index rows, Index cols, double variance, Rng& rng) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  CMatrix out(rows, cols);
  fill_gaussian(out.data(), out.size(), variance, rng);
  return out;
}

CVector sample_complex_gaussian_vector(Index len, double variance, Rng& rng) {
  if (len < 0) throw std::invalid_argument("negative vector length");
  CVector out(len);
  fill_gaussian(out.data(), out.size(), variance, rng);
  return out;
}

void require_finite(const CMatrix& a, const char* what) {
  if (!a.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

void require_finite(const CVector& a, const char* what) {
  if (!a.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

LeastNormSolution least_norm_solve(const CMatrix& a, const CVector& r, double rank_tol) {
  if (a.rows() >= a.cols()) {
    throw std::invalid_argument("least_norm_solve expects a wide system (rows < cols)");
  }
  if (r.size() != a.rows()) throw std::invalid_argument("least_norm_solve: rhs length mismatch");
  require_finite(a, "least_norm_solve matrix");
  require_finite(r, "least_norm_solve rhs");

  LeastNormSolution out;
  if (a.rows() == 0) {
    out.x = CVector::Zero(a.cols());
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
  cod.setThreshold(rank_tol);
  cod.compute(a);
  out.x = cod.solve(r);
  out.rank = cod.rank();
  out.rank_deficient = out.rank < a.rows();
  out.residual = (a * out.x - r).norm();
  const double scale = a.norm() * out.x.norm() + r.norm();
  out.consistent = out.residual <= 1e-9 * (scale > 0.0 ? scale : 1.0);
  return out;
}

Index numerical_rank(const CMatrix& a, double tol) {
  if (a.size() == 0) throw std::invalid_argument("numerical_rank of an empty matrix");
  if (!(tol > 0.0)) throw std::invalid_argument("numerical_rank tolerance must be > 0");
  require_finite(a, "numerical_rank matrix");
  Eigen::JacobiSVD<CMatrix> svd(a);
  const RVector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = tol * s(0);
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++rank;
  }
  return rank;
}

CMatrix pseudo_inverse(const CMatrix& a, double rank_tol, Index* rank) {
  require_finite(a, "pseudo_inverse matrix");
  if (a.size() == 0) {
    if (rank) *rank = 0;
    return CMatrix::Zero(a.cols(), a.rows());
  }
  Eigen::CompleteOrthogonalDecomposition<CMatrix> cod;
  cod.setThreshold(rank_tol);
  cod.compute(a);
  if (rank) *rank = cod.rank();
  return cod.pseudoInverse();
}

}  // namespace risnull
