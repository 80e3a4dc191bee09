#include "risnull/numerics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

using namespace risnull;

namespace {

// Null-space basis from a full SVD; independent of the COD used in the library.
CMatrix svd_null_space(const CMatrix& a) {
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const Index r = (svd.singularValues().array() > 1e-10 * svd.singularValues()(0)).count();
  return svd.matrixV().rightCols(a.cols() - r);
}

}  // namespace

TEST_CASE("complex gaussian: zero variance gives zeros") {
  Rng rng(1);
  const CMatrix z = sample_complex_gaussian(3, 5, 0.0, rng);
  CHECK(z.rows() == 3);
  CHECK(z.cols() == 5);
  CHECK(z.norm() == 0.0);
}

TEST_CASE("complex gaussian: negative variance rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_complex_gaussian(2, 2, -1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_complex_gaussian_vector(2, -0.5, rng), std::invalid_argument);
}

TEST_CASE("complex gaussian: second moment and mean magnitude") {
  Rng rng(20240601);
  const CMatrix z = sample_complex_gaussian(1, 100000, 1.0, rng);
  const double m2 = z.cwiseAbs2().mean();
  const double m1 = z.cwiseAbs().mean();
  CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
  CHECK(m1 == doctest::Approx(std::sqrt(std::numbers::pi) / 2.0).epsilon(0.01));
  // Variance split evenly between real and imaginary parts.
  CHECK(z.real().cwiseAbs2().mean() == doctest::Approx(0.5).epsilon(0.02));
  CHECK(z.imag().cwiseAbs2().mean() == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("complex gaussian: fixed seed is bit-reproducible") {
  Rng a(99), b(99);
  const CMatrix x = sample_complex_gaussian(4, 7, 2.5, a);
  const CMatrix y = sample_complex_gaussian(4, 7, 2.5, b);
  CHECK((x.array() == y.array()).all());
}

TEST_CASE("least_norm_solve: single row") {
  CMatrix a(1, 2);
  a << 1.0, 0.0;
  CVector r(1);
  r << 2.0;
  const LeastNormSolution s = least_norm_solve(a, r);
  CHECK(std::abs(s.x(0) - Complex(2.0, 0.0)) < 1e-14);
  CHECK(std::abs(s.x(1)) < 1e-14);
  CHECK(s.rank == 1);
  CHECK_FALSE(s.rank_deficient);
  CHECK(s.consistent);
}

TEST_CASE("least_norm_solve: identity-padded system is solved exactly") {
  CMatrix a = CMatrix::Zero(2, 4);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  CVector r(2);
  r << Complex(0.3, -1.2), Complex(-2.0, 0.5);
  const LeastNormSolution s = least_norm_solve(a, r);
  CHECK((a * s.x - r).norm() < 1e-10);
  CHECK(s.residual < 1e-10);
  CHECK(s.x.tail(2).norm() < 1e-14);
}

TEST_CASE("least_norm_solve: minimum norm against null-space shifts") {
  Rng rng(7);
  const CMatrix a = sample_complex_gaussian(5, 20, 1.0, rng);
  const CVector r = sample_complex_gaussian_vector(5, 1.0, rng);
  const LeastNormSolution s = least_norm_solve(a, r);
  CHECK((a * s.x - r).norm() < 1e-10 * r.norm());

  const CMatrix null = svd_null_space(a);
  REQUIRE(null.cols() == 15);
  for (Index j = 0; j < null.cols(); ++j) {
    CHECK(std::abs(real_inner(s.x, null.col(j))) < 1e-8 * s.x.norm());
    CHECK(std::abs(real_inner(s.x, Complex(0, 1) * null.col(j))) < 1e-8 * s.x.norm());
  }
  for (int t = 0; t < 50; ++t) {
    const CVector z = null * sample_complex_gaussian_vector(null.cols(), 1.0, rng);
    const CVector other = s.x + z;
    CHECK((a * other - r).norm() < 1e-9 * r.norm());
    CHECK(s.x.norm() <= other.norm());
  }
}

TEST_CASE("least_norm_solve: inconsistent rank-deficient system is flagged") {
  CMatrix a = CMatrix::Zero(2, 3);
  a.row(0) << 1.0, 2.0, 0.0;
  a.row(1) << 2.0, 4.0, 0.0;
  CVector r(2);
  r << 1.0, 0.0;
  const LeastNormSolution s = least_norm_solve(a, r);
  CHECK(s.rank == 1);
  CHECK(s.rank_deficient);
  CHECK_FALSE(s.consistent);
  // Least-squares optimality: residual orthogonal to the range of A.
  CHECK((a.adjoint() * (a * s.x - r)).norm() < 1e-12);
}

TEST_CASE("least_norm_solve: argument checks") {
  CMatrix tall = CMatrix::Identity(3, 2);
  CHECK_THROWS_AS(least_norm_solve(tall, CVector::Ones(3)), std::invalid_argument);
  CMatrix a = CMatrix::Identity(1, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(least_norm_solve(a, CVector::Ones(1)), std::invalid_argument);
  CHECK_THROWS_AS(least_norm_solve(CMatrix::Identity(1, 2), CVector::Ones(2)), std::invalid_argument);
}

TEST_CASE("numerical_rank: identity, rank one, generic Gaussian") {
  CHECK(numerical_rank(CMatrix::Identity(3, 3), 1e-8) == 3);

  Rng rng(3);
  const CVector u = sample_complex_gaussian_vector(4, 1.0, rng);
  const CVector w = sample_complex_gaussian_vector(4, 1.0, rng);
  CHECK(numerical_rank(u * w.adjoint(), 1e-8) == 1);

  for (int t = 0; t < 100; ++t) {
    CHECK(numerical_rank(sample_complex_gaussian(4, 6, 1.0, rng)) == 4);
  }
}

TEST_CASE("numerical_rank: invariant under permutation and unitary scaling") {
  Rng rng(11);
  CMatrix a = sample_complex_gaussian(5, 3, 1.0, rng) * sample_complex_gaussian(3, 6, 1.0, rng);
  REQUIRE(numerical_rank(a) == 3);
  Eigen::PermutationMatrix<Eigen::Dynamic> pr(5), pc(6);
  pr.setIdentity();
  pc.setIdentity();
  std::shuffle(pr.indices().data(), pr.indices().data() + 5, rng);
  std::shuffle(pc.indices().data(), pc.indices().data() + 6, rng);
  CHECK(numerical_rank(pr * a * pc) == 3);
  const Eigen::HouseholderQR<CMatrix> qr(sample_complex_gaussian(5, 5, 1.0, rng));
  const CMatrix q = qr.householderQ();
  CHECK(numerical_rank(q * a * Complex(0.0, 3.0)) == 3);
}

TEST_CASE("numerical_rank: argument checks") {
  CHECK_THROWS_AS(numerical_rank(CMatrix(0, 3)), std::invalid_argument);
  CHECK_THROWS_AS(numerical_rank(CMatrix::Identity(2, 2), 0.0), std::invalid_argument);
}

TEST_CASE("pseudo_inverse satisfies the Penrose conditions") {
  Rng rng(5);
  const CMatrix a = sample_complex_gaussian(4, 9, 1.0, rng);
  Index rank = 0;
  const CMatrix p = pseudo_inverse(a, kDefaultRankTol, &rank);
  CHECK(rank == 4);
  CHECK((a * p * a - a).norm() < 1e-10);
  CHECK((p * a * p - p).norm() < 1e-10);
  CHECK(((a * p).adjoint() - a * p).norm() < 1e-10);
  CHECK(((p * a).adjoint() - p * a).norm() < 1e-10);
}

TEST_CASE("real_inner is re(a^H b)") {
  CVector a(2), b(2);
  a << Complex(1, 2), Complex(0, -1);
  b << Complex(3, -1), Complex(2, 2);
  // conj(1+2i)(3-i) = 1 - 7i ; conj(-i)(2+2i) = -2 + 2i
  CHECK(real_inner(a, b) == doctest::Approx(-1.0));
}
