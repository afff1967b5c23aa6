// RTF vector estimators for the successive-speaker scenario.
//
// cw_estimate    de-whitened principal eigenvector, noise whitening
// cwu_estimate   same pipeline whitened with the undesired covariance
// bop_estimate   oblique projection blocking the unknown speaker, solved by
//                a multi-start gradient descent with analytic gradient
// cbw_estimate   blocks the known speaker, whitens the reduced noise term,
//                and recovers the RTF from a paired SVD plus a stacked
//                least-squares solve
//
// Estimators consume covariance matrices only; they never see raw signals,
// so oracle and sample-estimated inputs are interchangeable. All calls are
// pure and safe to run concurrently (BOP seeds its own RNG per call).
#pragma once

#include <optional>

#include "rtfbeam/numerics.hpp"

namespace rtfbeam {

// M-dimensional RTF vector; the entry at reference_index is exactly 1.
struct RtfVector {
  CVec entries;
  int reference_index = 0;

  int channels() const { return static_cast<int>(entries.size()); }

  // v / v[r] with the reference entry forced to exactly 1+0j.
  // Throws ZeroReferenceEntry when |v[r]| <= tol * ||v||.
  static RtfVector normalized(const CVec& v, int reference_index,
                              double tol = kDefaultTol);
};

struct BopOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-8;
  int restarts = 2;  // random starts tried beyond the deterministic ones
  std::uint64_t seed = 0;
  // Optional warm start (the surrounding pipeline passes its CWu estimate).
  std::optional<CVec> initial_guess;
};

struct BopResult {
  RtfVector estimate;
  bool converged = false;
  double objective = 0.0;
  int iterations = 0;  // of the winning start
};

// Everything Eq. 18-24 produce on the way to the CBW estimate.
struct CbwSolution {
  CVec q_left;       // M-1
  CVec q_right;      // M-1
  Complex alpha{0.0, 0.0};
  CVec h_tilde;      // M, scaled RTF before normalization
  RtfVector estimate;
  double rank1_ratio = 0.0;  // sigma_2/sigma_1 of the whitened blocked matrix
};

// Covariance whitening for a single speaker: normalized de-whitened principal
// eigenvector of R_n^{-H/2} R_y2 R_n^{-1/2}.
RtfVector cw_estimate(const CMat& R_y2, const CMat& R_n, int reference_index,
                      double tol = kDefaultTol);

// CW whitened with the undesired covariance estimated in the single-speaker
// segment; biased when the interferer PSD differs between segments.
RtfVector cwu_estimate(const CMat& R_y3, const CMat& R_v2, int reference_index,
                       double tol = kDefaultTol);

// Tr{P_{g,theta} R_y3 P_{g,theta}^H}: power left after obliquely projecting
// onto g along theta. Nonnegative real; invariant to rescaling of theta.
double bop_objective(const CVec& theta, const CMat& R_y3, const RtfVector& g);

// Gradient of bop_objective with respect to the 2M real coordinates of theta
// (real parts stacked over imaginary parts), from Wirtinger calculus.
Eigen::VectorXd bop_gradient(const CVec& theta, const CMat& R_y3,
                             const RtfVector& g);

// Minimizes bop_objective over the direction of theta and normalizes the
// minimizer to reference entry 1.
BopResult bop_estimate(const CMat& R_y3, const RtfVector& g, int reference_index,
                       const BopOptions& opts = {});

// Covariance blocking and whitening; exact for oracle R_n, exact g and R_y3
// following the rank-1 + rank-1 + noise model. Requires M >= 3.
CbwSolution cbw_estimate(const CMat& R_y3, const CMat& R_n, const RtfVector& g,
                         int reference_index, double tol = kDefaultTol);

}  // namespace rtfbeam
