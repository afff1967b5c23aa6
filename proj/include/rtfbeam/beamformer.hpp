// Closed-form LCMV weights and their application to spectrograms.
#pragma once

#include <vector>

#include "rtfbeam/estimators.hpp"
#include "rtfbeam/stft.hpp"

namespace rtfbeam {

// Per-bin LCMV weights satisfying w^H h = 1 and w^H g = delta.
struct BeamformerWeights {
  CVec w;
  double delta = 0.0;  // linear interferer scaling (real by construction)
  int reference_index = 0;
};

inline double delta_from_db(double delta_db) {
  return std::pow(10.0, delta_db / 20.0);
}

// w = R_n^{-1} C (C^H R_n^{-1} C)^{-1} [1; delta] with C = [h g].
// Throws SingularNoiseCovariance / CollinearConstraints.
BeamformerWeights lcmv_weights(const RtfVector& h, const RtfVector& g,
                               const CMat& R_n, double delta,
                               double tol = kDefaultTol);

// z_t = w^H y_t per frame and bin; one weight set per bin.
Spectrogram apply_beamformer(const std::vector<BeamformerWeights>& weights,
                             const Spectrogram& spec);

}  // namespace rtfbeam
