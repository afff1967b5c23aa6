#include "rtfbeam/beamformer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace rtfbeam {

BeamformerWeights lcmv_weights(const RtfVector& h, const RtfVector& g,
                               const CMat& R_n, double delta, double tol) {
  const Eigen::Index m = R_n.rows();
  if (R_n.cols() != m || h.entries.size() != m || g.entries.size() != m)
    throw Error(ErrorCode::dimension_mismatch, "lcmv_weights: sizes do not match");

  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (R_n + R_n.adjoint()),
                                          Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() >
        tol * std::max(eig.eigenvalues().maxCoeff(), 0.0)))
    throw Error(ErrorCode::singular_noise_covariance,
                "noise covariance singular within tolerance");

  CMat c(m, 2);
  c.col(0) = h.entries;
  c.col(1) = g.entries;

  // Factorization-and-solve throughout; no explicit inverse.
  Eigen::LDLT<CMat> ldlt(0.5 * (R_n + R_n.adjoint()));
  const CMat rn_inv_c = ldlt.solve(c);
  const CMat gram = c.adjoint() * rn_inv_c;  // C^H R_n^{-1} C, 2x2

  const double gram_scale = gram.norm();
  if (!(std::abs(gram.determinant()) > tol * gram_scale * gram_scale))
    throw Error(ErrorCode::collinear_constraints,
                "constraint RTF vectors are collinear");

  Eigen::Vector2cd rhs;
  rhs << Complex(1.0, 0.0), Complex(delta, 0.0);
  BeamformerWeights out;
  out.w = rn_inv_c * gram.fullPivLu().solve(rhs);
  out.delta = delta;
  out.reference_index = h.reference_index;
  return out;
}

Spectrogram apply_beamformer(const std::vector<BeamformerWeights>& weights,
                             const Spectrogram& spec) {
  if (static_cast<int>(weights.size()) != spec.bins())
    throw Error(ErrorCode::dimension_mismatch,
                "need one weight vector per frequency bin");
  for (const auto& bw : weights)
    if (bw.w.size() != spec.channels())
      throw Error(ErrorCode::dimension_mismatch,
                  "weight length does not match channel count");

  Spectrogram out(spec.frames(), spec.bins(), 1);
  for (int t = 0; t < spec.frames(); ++t)
    for (int f = 0; f < spec.bins(); ++f)
      out.at(t, f, 0) = weights[f].w.dot(spec.frame_vec(t, f));
  return out;
}

}  // namespace rtfbeam
