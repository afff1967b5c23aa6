// Synthetic acoustic scenario generation: ground-truth RTFs from a free-field
// direct path plus random reflections, spherically isotropic diffuse noise,
// stochastic sources, the successive-speaker mix, and the exact model
// covariance matrices.
#pragma once

#include <array>
#include <optional>
#include <vector>

#include "rtfbeam/rng.hpp"
#include "rtfbeam/stft.hpp"

namespace rtfbeam {

using Position = std::array<double, 3>;

struct ArrayGeometry {
  std::vector<Position> mic_positions;
  int reference_index = 0;
  double speed_of_sound = 343.0;

  int channels() const { return static_cast<int>(mic_positions.size()); }
  void validate() const;

  // Uniform linear array along the x axis, centered at the origin.
  static ArrayGeometry linear(int count, double spacing_m, int reference = 0);
};

struct ScenarioConfig {
  ArrayGeometry geometry = ArrayGeometry::linear(4, 0.02);
  Position target_position{0.0, 2.0, 0.0};
  Position interferer_position{1.0, 1.5, 0.0};
  double snr_db = 0.0;  // broadband, at the reference microphone
  double sir_db = 0.0;
  // Segment boundaries {t1, t2, t_end}: noise-only [0,t1), single-speaker
  // [t1,t2), dual-speaker [t2,t_end).
  std::array<double, 3> schedule_seconds{1.0, 4.0, 7.0};
  int reflections = 8;
  double decay = 27.6;  // reflection energy decay rate, 1/s
  // The interferer changes level when the target starts: |change| is drawn
  // uniformly from this dB range with random sign (speech-like
  // nonstationarity between segments 2 and 3). Set both to 0 to disable.
  double interferer_level_change_min_db = 3.0;
  double interferer_level_change_max_db = 6.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Per-bin exact model description of one rendered scenario plus the clean
// components. Segment index s is 1-based ({1,2,3}) to match the schedule.
struct GroundTruth {
  std::vector<CVec> h;  // target RTF per bin, reference entry exactly 1
  std::vector<CVec> g;  // interferer RTF per bin
  // phi_x[bin][s-1], phi_u[bin][s-1]: model PSDs at the reference microphone.
  std::vector<std::array<double, 3>> phi_x;
  std::vector<std::array<double, 3>> phi_u;
  std::vector<CMat> noise_cov;  // model noise covariance per bin
  Spectrogram x, u, n;          // clean components; mix = x + u + n
  int reference_index = 0;
};

struct OracleCovariances {
  CMat R_y, R_n, R_v, R_x, R_u;
};

struct RenderedScenario {
  Spectrogram mix;
  GroundTruth truth;
  SegmentSchedule schedule;
};

// Free-field direct path plus `reflections` random delayed/attenuated
// reflections, normalized so the reference entry is exactly 1 at every bin.
// Throws SourceOnMicrophone.
std::vector<CVec> synth_rtf(const ArrayGeometry& geometry, const Position& source,
                            int reflections, double decay, Rng& rng,
                            const StftConfig& stft);

// Spherically isotropic coherence Gamma_ij = sinc(2 pi f d_ij / c) with unit
// diagonal. Real symmetric; PSD only after the eigenvalue floor applied by
// the noise synthesis (see diffuse_coherence_factor).
CMat diffuse_coherence(const ArrayGeometry& geometry, double f_hz);

// Repaired coherence and a factor F with F F^H = repaired coherence.
// Eigenvalues below `floor_eig` are raised to it before factorization.
struct CoherenceModel {
  CMat coherence;
  CMat factor;
};
CoherenceModel diffuse_coherence_factor(const ArrayGeometry& geometry, double f_hz,
                                        double floor_eig = 1e-6);

// Renders the successive-speaker mix. Sources and noise are synthesized
// directly in the STFT domain; interferer and noise are rescaled so the
// measured broadband SIR/SNR at the reference channel over each source's
// active segment equal the configured values.
RenderedScenario render_scenario(const ScenarioConfig& cfg, const StftConfig& stft);

// Optional replacement sources: reference-microphone STFTs taken from caller
// signals instead of the synthetic spectrally tilted noise.
RenderedScenario render_scenario(const ScenarioConfig& cfg, const StftConfig& stft,
                                 const std::optional<Eigen::VectorXd>& target_source,
                                 const std::optional<Eigen::VectorXd>& interferer_source);

// Exact model covariances for one (bin, segment): R_y = h phi_x h^H +
// g phi_u g^H + R_n, R_v = R_u + R_n. segment is 1-based.
OracleCovariances oracle_covariances(const GroundTruth& truth, int bin, int segment);

}  // namespace rtfbeam
