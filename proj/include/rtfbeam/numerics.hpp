// Dense complex linear-algebra kernels shared by the RTF estimators:
// Hermitian square-root factors, principal eigen/singular extraction,
// Moore-Penrose pseudo-inverses and the projection operators.
//
// All functions are pure and safe to call concurrently.
#pragma once

#include <Eigen/Dense>
#include <complex>

#include "rtfbeam/errors.hpp"

namespace rtfbeam {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

// Relative tolerance used on matrix identities (Hermitian check, PSD check,
// spectral-gap check) unless a caller overrides it.
inline constexpr double kDefaultTol = 1e-10;

/// Factor F of a Hermitian PSD matrix R with F^H * F = R.
struct HermitianFactor {
  CMat factor;

  Eigen::Index size() const { return factor.rows(); }
  // F^{-H} * X, i.e. the left half of a whitening transform.
  CMat solve_adjoint(const CMat& rhs) const;
  // X * F^{-1}, the right half.
  CMat solve_right(const CMat& rhs) const;
};

/// Principal singular triplet (u, sigma, v) with A*v = sigma*u.
struct SingularTriplet {
  CVec left;
  double sigma = 0.0;
  CVec right;
};

// Square-root factor of a Hermitian PSD matrix: returns F with F^H F = R.
// Cholesky when R is safely positive definite, eigendecomposition otherwise.
// Throws NotHermitian / NotPositiveSemiDefinite.
HermitianFactor hermitian_sqrt_factor(const CMat& R, double tol = kDefaultTol);

// Unit-norm eigenvector of the largest eigenvalue of a Hermitian matrix.
// The matrix is symmetrized before decomposition; the phase is fixed so the
// largest-magnitude entry is real positive. Throws DegenerateSpectrum when
// the gap between the two largest eigenvalues is below tol*||A||.
CVec principal_eigvec(const CMat& A, double tol = kDefaultTol);

// Principal singular triplet from one joint SVD, so the returned pair is
// phase-consistent: A*v = sigma*u. Throws ZeroMatrix.
SingularTriplet principal_singular_pair(const CMat& A, double tol = kDefaultTol);

// Ratio sigma_2/sigma_1 of a matrix, 0 for (numerically) rank-1 input.
// Used as the rank-1 diagnostic of the whitened blocked covariance.
double rank1_defect(const CMat& A);

// Moore-Penrose pseudo-inverse. Singular values <= tol*sigma_max are treated
// as zero; tol = 0 selects the default cutoff max(rows,cols)*eps.
CMat pseudo_inverse(const CMat& A, double tol = 0.0);

// Residual maker of a vector: P = I - theta*theta^H/(theta^H theta).
// Hermitian, idempotent, P*theta = 0. Throws ZeroVector.
CMat residual_maker(const CVec& theta, double tol = kDefaultTol);

// Oblique projection P = g (g^H Pperp_theta g)^{-1} g^H Pperp_theta with
// P*g = g and P*theta = 0. Throws CollinearVectors when the scalar
// g^H Pperp_theta g vanishes.
CMat oblique_projection(const CVec& g, const CVec& theta, double tol = kDefaultTol);

// Range-complement projector of a matrix: I - B*B^+.
CMat projection_complement(const CMat& B);

}  // namespace rtfbeam
