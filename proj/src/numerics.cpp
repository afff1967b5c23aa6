#include "rtfbeam/numerics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace rtfbeam {

namespace {

double hermitian_defect(const CMat& A) {
  return (A - A.adjoint()).norm();
}

void require_square(const CMat& A, const char* who) {
  if (A.rows() != A.cols())
    throw Error(ErrorCode::dimension_mismatch,
                std::string(who) + " requires a square matrix");
}

// Rotate v so that its largest-magnitude entry is real positive.
// Returns the applied unit phase so callers can keep pairs consistent.
Complex canonical_phase(const CVec& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  const Complex top = v(imax);
  const double mag = std::abs(top);
  if (mag == 0.0) return Complex(1.0, 0.0);
  return std::conj(top) / mag;
}

}  // namespace

CMat HermitianFactor::solve_adjoint(const CMat& rhs) const {
  return factor.adjoint().partialPivLu().solve(rhs);
}

CMat HermitianFactor::solve_right(const CMat& rhs) const {
  // X F^{-1} = (F^{-H} X^H)^H
  return factor.adjoint().partialPivLu().solve(rhs.adjoint()).adjoint();
}

HermitianFactor hermitian_sqrt_factor(const CMat& R, double tol) {
  require_square(R, "hermitian_sqrt_factor");
  const double scale = R.norm();
  if (hermitian_defect(R) > tol * std::max(scale, 1.0))
    throw Error(ErrorCode::not_hermitian, "input is not Hermitian");

  const CMat H = 0.5 * (R + R.adjoint());
  if (scale == 0.0) return {CMat::Zero(R.rows(), R.cols())};

  Eigen::LLT<CMat> llt(H);
  if (llt.info() == Eigen::Success) {
    // H = L L^H, so F = L^H satisfies F^H F = H.
    return {CMat(llt.matrixL().adjoint())};
  }

  // Near-singular PSD input: fall back to an eigendecomposition and clamp
  // eigenvalues in [-tol*||R||, 0] to zero.
  Eigen::SelfAdjointEigenSolver<CMat> eig(H);
  RVec lam = eig.eigenvalues();
  if (lam.minCoeff() < -tol * scale)
    throw Error(ErrorCode::not_positive_semi_definite,
                "smallest eigenvalue " + std::to_string(lam.minCoeff()) +
                    " below PSD tolerance");
  lam = lam.cwiseMax(0.0);
  // F = sqrt(Lambda) U^H gives F^H F = U Lambda U^H = H.
  return {CMat(lam.cwiseSqrt().asDiagonal() * eig.eigenvectors().adjoint())};
}

CVec principal_eigvec(const CMat& A, double tol) {
  require_square(A, "principal_eigvec");
  const double scale = A.norm();
  if (hermitian_defect(A) > tol * std::max(scale, 1.0))
    throw Error(ErrorCode::not_hermitian, "input is not Hermitian");

  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (A + A.adjoint()));
  const Eigen::Index n = A.rows();
  const RVec& lam = eig.eigenvalues();  // ascending
  if (n >= 2) {
    const double gap = lam(n - 1) - lam(n - 2);
    if (gap <= tol * std::max(scale, 1.0))
      throw Error(ErrorCode::degenerate_spectrum,
                  "no dominant eigenvalue (gap " + std::to_string(gap) + ")");
  }
  CVec v = eig.eigenvectors().col(n - 1);
  v *= canonical_phase(v);
  return v;
}

SingularTriplet principal_singular_pair(const CMat& A, double tol) {
  const double scale = A.norm();
  if (scale <= tol)
    throw Error(ErrorCode::zero_matrix, "matrix norm below tolerance");

  Eigen::JacobiSVD<CMat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SingularTriplet out;
  out.sigma = svd.singularValues()(0);
  out.left = svd.matrixU().col(0);
  out.right = svd.matrixV().col(0);
  // One phase applied to both sides keeps A*v = sigma*u intact.
  const Complex phase = canonical_phase(out.right);
  out.left *= phase;
  out.right *= phase;
  return out;
}

double rank1_defect(const CMat& A) {
  Eigen::JacobiSVD<CMat> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() < 2 || s(0) == 0.0) return 0.0;
  return s(1) / s(0);
}

CMat pseudo_inverse(const CMat& A, double tol) {
  Eigen::JacobiSVD<CMat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVec& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return CMat::Zero(A.cols(), A.rows());

  const double eps = std::numeric_limits<double>::epsilon();
  const double cutoff =
      (tol > 0.0 ? tol : static_cast<double>(std::max(A.rows(), A.cols())) * eps) * s(0);

  RVec inv = RVec::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

CMat residual_maker(const CVec& theta, double tol) {
  const double nrm2 = theta.squaredNorm();
  if (!(nrm2 > tol * tol))
    throw Error(ErrorCode::zero_vector, "residual_maker of a zero vector");
  const Eigen::Index m = theta.size();
  return CMat::Identity(m, m) - (theta * theta.adjoint()) / nrm2;
}

CMat oblique_projection(const CVec& g, const CVec& theta, double tol) {
  if (g.size() != theta.size())
    throw Error(ErrorCode::dimension_mismatch, "g and theta differ in size");
  const CMat perp = residual_maker(theta, tol);
  // g^H Pperp g = ||Pperp g||^2; vanishes iff g is collinear with theta.
  const double denom = std::real((g.adjoint() * perp * g)(0, 0));
  if (!(denom > tol * g.squaredNorm()))
    throw Error(ErrorCode::collinear_vectors,
                "g lies in the span of theta; oblique projection undefined");
  return g * (g.adjoint() * perp) / denom;
}

CMat projection_complement(const CMat& B) {
  const Eigen::Index m = B.rows();
  return CMat::Identity(m, m) - B * pseudo_inverse(B);
}

}  // namespace rtfbeam
