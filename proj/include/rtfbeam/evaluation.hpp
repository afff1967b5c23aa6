// Shadow-filtered broadband SINR-improvement evaluation and the Monte-Carlo
// experiment runner.
#pragma once

#include <string>
#include <vector>

#include "rtfbeam/beamformer.hpp"
#include "rtfbeam/scenario.hpp"

namespace rtfbeam {

enum class Method { cwu, bop, cbw };

const char* method_name(Method m);
Method method_from_name(const std::string& name);

struct PositionPair {
  Position target;
  Position interferer;
};

struct ExperimentConfig {
  std::vector<double> snr_grid_db{-10.0, -5.0, 0.0, 5.0, 10.0};
  std::vector<double> sir_grid_db{-10.0, -5.0, 0.0, 5.0, 10.0};
  std::vector<PositionPair> position_pairs;
  std::vector<Method> methods{Method::cwu, Method::bop, Method::cbw};
  std::vector<int> references{0, 1, 2, 3};
  std::uint64_t trials_seed = 1;
  ScenarioConfig scenario;  // template; positions/SNR/SIR/seed set per cell
  StftConfig stft;
  double delta_db = -40.0;
  int jobs = 1;  // worker threads; results are independent of this
  // Replace sample covariances and the estimated g by the exact model values
  // (diagnostic mode).
  bool use_oracle_covariances = false;
  BopOptions bop;

  void validate() const;
};

// One (position pair, SIR, SNR, reference, method) evaluation.
struct CellResult {
  Method method = Method::cbw;
  double snr_db = 0.0;
  double sir_db = 0.0;
  int pair_index = 0;
  int reference = 0;
  double delta_sinr_db = 0.0;
  bool ok = false;
  std::string error;  // set when !ok
};

struct ResultRow {
  Method method = Method::cbw;
  double snr_db = 0.0;
  double mean_delta_sinr_db = 0.0;
  double std_delta_sinr_db = 0.0;
  int n = 0;       // aggregated cells
  int failed = 0;  // excluded cells
};

struct ExperimentResults {
  std::vector<CellResult> raw;      // sorted by (method, snr, sir, pair, ref)
  std::vector<ResultRow> summary;   // sorted by (method, snr)
};

// Broadband SINR improvement in dB:
// 10 log10(sum|x_out|^2 / sum|v_out|^2) - 10 log10(sum|x_in|^2 / sum|v_in|^2).
// Throws ZeroPower when any of the four sums vanishes.
double sinr_improvement(const Eigen::VectorXd& x_in, const Eigen::VectorXd& v_in,
                        const Eigen::VectorXd& x_out, const Eigen::VectorXd& v_out);

// The same beamformer applied separately to the clean target component and to
// the undesired component u + n, synthesized to the time domain and restricted
// to the dual-speaker sample range. Inputs are the reference-channel
// components over the same range.
struct ShadowFiltered {
  Eigen::VectorXd x_in, v_in, x_out, v_out;
};
ShadowFiltered shadow_filter(const std::vector<BeamformerWeights>& weights,
                             const GroundTruth& truth,
                             const SegmentSchedule& schedule,
                             const StftConfig& stft);

// Full protocol: render, estimate covariances per segment, estimate g (CW),
// run each method, build the LCMV, shadow-filter, aggregate mean/std per
// (method, SNR). Failed cells are recorded and excluded from aggregates.
ExperimentResults run_experiment(const ExperimentConfig& cfg);

// Default 3x3 source grid mirroring a 9-position laboratory layout; all
// ordered non-collocated pairs (72 with the default grid).
std::vector<PositionPair> default_position_pairs();

}  // namespace rtfbeam
