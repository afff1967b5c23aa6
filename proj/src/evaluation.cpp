#include "rtfbeam/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace rtfbeam {

const char* method_name(Method m) {
  switch (m) {
    case Method::cwu: return "CWu";
    case Method::bop: return "BOP";
    case Method::cbw: return "CBW";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "CWu" || name == "cwu") return Method::cwu;
  if (name == "BOP" || name == "bop") return Method::bop;
  if (name == "CBW" || name == "cbw") return Method::cbw;
  throw Error(ErrorCode::config_error, "unknown method '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (snr_grid_db.empty() || sir_grid_db.empty())
    throw Error(ErrorCode::config_error, "SNR/SIR grids must be non-empty");
  if (methods.empty())
    throw Error(ErrorCode::config_error, "method list must be non-empty");
  if (references.empty())
    throw Error(ErrorCode::config_error, "reference list must be non-empty");
  const int channels = scenario.geometry.channels();
  for (int r : references)
    if (r < 0 || r >= channels)
      throw Error(ErrorCode::config_error, "reference index out of range");
  for (const auto& p : position_pairs) {
    const double dx = p.target[0] - p.interferer[0];
    const double dy = p.target[1] - p.interferer[1];
    const double dz = p.target[2] - p.interferer[2];
    if (dx * dx + dy * dy + dz * dz <= 0.0)
      throw Error(ErrorCode::config_error, "position pair is collocated");
  }
  stft.validate();
}

double sinr_improvement(const Eigen::VectorXd& x_in, const Eigen::VectorXd& v_in,
                        const Eigen::VectorXd& x_out, const Eigen::VectorXd& v_out) {
  if (x_in.size() != v_in.size() || x_out.size() != v_out.size())
    throw Error(ErrorCode::dimension_mismatch, "component lengths differ");
  const double px_in = x_in.squaredNorm();
  const double pv_in = v_in.squaredNorm();
  const double px_out = x_out.squaredNorm();
  const double pv_out = v_out.squaredNorm();
  if (px_in == 0.0 || pv_in == 0.0 || px_out == 0.0 || pv_out == 0.0)
    throw Error(ErrorCode::zero_power, "a component power sum is zero");
  return 10.0 * std::log10(px_out / pv_out) - 10.0 * std::log10(px_in / pv_in);
}

ShadowFiltered shadow_filter(const std::vector<BeamformerWeights>& weights,
                             const GroundTruth& truth,
                             const SegmentSchedule& schedule,
                             const StftConfig& stft) {
  const Spectrogram v_spec = truth.u + truth.n;
  const int ref = truth.reference_index;

  const Spectrogram x_out_spec = apply_beamformer(weights, truth.x);
  const Spectrogram v_out_spec = apply_beamformer(weights, v_spec);

  const std::int64_t n = schedule.end_sample;
  const SampleMatrix x_in_t = synthesize(truth.x.channel(ref), stft, n);
  const SampleMatrix v_in_t = synthesize(v_spec.channel(ref), stft, n);
  const SampleMatrix x_out_t = synthesize(x_out_spec, stft, n);
  const SampleMatrix v_out_t = synthesize(v_out_spec, stft, n);

  // The metric window is the dual-speaker segment; the target is silent
  // everywhere else.
  const std::int64_t a = schedule.dual_start_sample;
  const std::int64_t len = schedule.end_sample - a;
  ShadowFiltered out;
  out.x_in = x_in_t.col(0).segment(a, len);
  out.v_in = v_in_t.col(0).segment(a, len);
  out.x_out = x_out_t.col(0).segment(a, len);
  out.v_out = v_out_t.col(0).segment(a, len);
  return out;
}

std::vector<PositionPair> default_position_pairs() {
  std::vector<Position> grid;
  for (double y : {1.0, 1.6, 2.2})
    for (double x : {-0.8, 0.0, 0.8}) grid.push_back({x, y, 0.0});
  std::vector<PositionPair> pairs;
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (i != j) pairs.push_back({grid[i], grid[j]});
  return pairs;
}

namespace {

struct BinData {
  CMat r_n, r_v2, r_y3;
  CVec g_hat;  // direction normalized at the first configured reference
};

struct ScenarioEval {
  // delta-SINR or error per (method index, reference index)
  std::vector<CellResult> cells;
};

// Renormalize a per-bin direction set to a new reference microphone.
std::vector<RtfVector> renormalize(const std::vector<CVec>& dirs, int reference) {
  std::vector<RtfVector> out;
  out.reserve(dirs.size());
  for (const CVec& d : dirs) out.push_back(RtfVector::normalized(d, reference));
  return out;
}

ScenarioEval evaluate_scenario(const ExperimentConfig& cfg, int pair_index,
                               double sir_db, double snr_db,
                               std::uint64_t cell_seed) {
  const int n_methods = static_cast<int>(cfg.methods.size());
  const int n_refs = static_cast<int>(cfg.references.size());
  ScenarioEval eval;
  eval.cells.resize(static_cast<std::size_t>(n_methods) * n_refs);
  for (int mi = 0; mi < n_methods; ++mi)
    for (int ri = 0; ri < n_refs; ++ri) {
      CellResult& cell = eval.cells[static_cast<std::size_t>(mi) * n_refs + ri];
      cell.method = cfg.methods[mi];
      cell.snr_db = snr_db;
      cell.sir_db = sir_db;
      cell.pair_index = pair_index;
      cell.reference = cfg.references[ri];
    }
  auto fail_all = [&](const std::string& msg) {
    for (CellResult& cell : eval.cells)
      if (!cell.ok && cell.error.empty()) cell.error = msg;
  };

  ScenarioConfig sc = cfg.scenario;
  sc.target_position = cfg.position_pairs[pair_index].target;
  sc.interferer_position = cfg.position_pairs[pair_index].interferer;
  sc.sir_db = sir_db;
  sc.snr_db = snr_db;
  sc.seed = cell_seed;

  RenderedScenario rs;
  try {
    rs = render_scenario(sc, cfg.stft);
  } catch (const Error& e) {
    fail_all(e.what());
    return eval;
  }

  const int bins = cfg.stft.bins();
  const int r0 = cfg.references.front();
  const double delta = delta_from_db(cfg.delta_db);

  std::vector<BinData> bin_data(bins);
  try {
    for (int b = 0; b < bins; ++b) {
      BinData& bd = bin_data[b];
      if (cfg.use_oracle_covariances) {
        const OracleCovariances oc2 = oracle_covariances(rs.truth, b, 2);
        const OracleCovariances oc3 = oracle_covariances(rs.truth, b, 3);
        bd.r_n = oc2.R_n;
        bd.r_v2 = oc2.R_v;
        bd.r_y3 = oc3.R_y;
        bd.g_hat = RtfVector::normalized(rs.truth.g[b], r0).entries;
      } else {
        bd.r_n = sample_covariance(rs.mix, b, rs.schedule.noise_only);
        bd.r_v2 = sample_covariance(rs.mix, b, rs.schedule.single_speaker);
        bd.r_y3 = sample_covariance(rs.mix, b, rs.schedule.dual_speaker);
        // R_y2 == R_v2: the target is silent in the single-speaker segment.
        bd.g_hat = cw_estimate(bd.r_v2, bd.r_n, r0).entries;
      }
    }
  } catch (const Error& e) {
    fail_all(e.what());
    return eval;
  }

  for (int mi = 0; mi < n_methods; ++mi) {
    const Method method = cfg.methods[mi];
    std::vector<CVec> h_dirs(bins);
    std::string method_error;
    for (int b = 0; b < bins && method_error.empty(); ++b) {
      const BinData& bd = bin_data[b];
      const RtfVector g_hat{bd.g_hat, r0};
      try {
        switch (method) {
          case Method::cwu:
            h_dirs[b] = cwu_estimate(bd.r_y3, bd.r_v2, r0).entries;
            break;
          case Method::bop: {
            BopOptions opts = cfg.bop;
            opts.seed = derive_seed(cell_seed, 0xb09, static_cast<std::uint64_t>(b));
            try {
              opts.initial_guess = cwu_estimate(bd.r_y3, bd.r_v2, r0).entries;
            } catch (const Error&) {
              opts.initial_guess.reset();
            }
            h_dirs[b] = bop_estimate(bd.r_y3, g_hat, r0, opts).estimate.entries;
            break;
          }
          case Method::cbw:
            h_dirs[b] = cbw_estimate(bd.r_y3, bd.r_n, g_hat, r0).estimate.entries;
            break;
        }
      } catch (const Error& e) {
        method_error = std::string(method_name(method)) + " failed at bin " +
                       std::to_string(b) + ": " + e.what();
      }
    }

    for (int ri = 0; ri < n_refs; ++ri) {
      CellResult& cell = eval.cells[static_cast<std::size_t>(mi) * n_refs + ri];
      if (!method_error.empty()) {
        cell.error = method_error;
        continue;
      }
      try {
        const int r = cfg.references[ri];
        std::vector<BeamformerWeights> weights;
        weights.reserve(bins);
        for (int b = 0; b < bins; ++b) {
          const RtfVector h_r = RtfVector::normalized(h_dirs[b], r);
          const RtfVector g_r = RtfVector::normalized(bin_data[b].g_hat, r);
          weights.push_back(lcmv_weights(h_r, g_r, bin_data[b].r_n, delta));
        }
        GroundTruth truth_r = rs.truth;  // metric normalized at reference r
        truth_r.reference_index = r;
        const ShadowFiltered sf =
            shadow_filter(weights, truth_r, rs.schedule, cfg.stft);
        cell.delta_sinr_db =
            sinr_improvement(sf.x_in, sf.v_in, sf.x_out, sf.v_out);
        cell.ok = true;
      } catch (const Error& e) {
        cell.error = e.what();
      }
    }
  }
  return eval;
}

}  // namespace

ExperimentResults run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  struct Task {
    int pair_index;
    int sir_index;
    int snr_index;
  };
  std::vector<Task> tasks;
  for (int p = 0; p < static_cast<int>(cfg.position_pairs.size()); ++p)
    for (int si = 0; si < static_cast<int>(cfg.sir_grid_db.size()); ++si)
      for (int ni = 0; ni < static_cast<int>(cfg.snr_grid_db.size()); ++ni)
        tasks.push_back({p, si, ni});

  std::vector<ScenarioEval> evals(tasks.size());
  std::atomic<std::size_t> next{0};
  const unsigned workers = cfg.jobs > 0
                               ? static_cast<unsigned>(cfg.jobs)
                               : std::max(1u, std::thread::hardware_concurrency());
  auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      const std::uint64_t seed =
          derive_seed(cfg.trials_seed, static_cast<std::uint64_t>(t.pair_index),
                      static_cast<std::uint64_t>(t.sir_index),
                      static_cast<std::uint64_t>(t.snr_index));
      evals[i] = evaluate_scenario(cfg, t.pair_index, cfg.sir_grid_db[t.sir_index],
                                   cfg.snr_grid_db[t.snr_index], seed);
    }
  };
  if (workers <= 1 || tasks.size() <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < std::min<std::size_t>(workers, tasks.size()); ++k)
      pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  ExperimentResults out;
  for (const ScenarioEval& e : evals)
    out.raw.insert(out.raw.end(), e.cells.begin(), e.cells.end());
  std::stable_sort(out.raw.begin(), out.raw.end(),
                   [](const CellResult& a, const CellResult& b) {
                     if (a.method != b.method) return a.method < b.method;
                     if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
                     if (a.sir_db != b.sir_db) return a.sir_db < b.sir_db;
                     if (a.pair_index != b.pair_index) return a.pair_index < b.pair_index;
                     return a.reference < b.reference;
                   });

  // Deterministic reduce over the sorted raw table, two-pass mean/std.
  for (const Method method : cfg.methods) {
    for (const double snr : cfg.snr_grid_db) {
      ResultRow row;
      row.method = method;
      row.snr_db = snr;
      std::vector<double> values;
      for (const CellResult& c : out.raw) {
        if (c.method != method || c.snr_db != snr) continue;
        if (c.ok)
          values.push_back(c.delta_sinr_db);
        else
          ++row.failed;
      }
      row.n = static_cast<int>(values.size());
      if (row.n > 0) {
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean_delta_sinr_db = sum / row.n;
        if (row.n > 1) {
          double acc = 0.0;
          for (double v : values) {
            const double d = v - row.mean_delta_sinr_db;
            acc += d * d;
          }
          row.std_delta_sinr_db = std::sqrt(acc / (row.n - 1));
        }
      }
      out.summary.push_back(row);
    }
  }

  // Sort summary rows to match the raw ordering convention.
  std::stable_sort(out.summary.begin(), out.summary.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.method != b.method) return a.method < b.method;
                     return a.snr_db < b.snr_db;
                   });
  return out;
}

}  // namespace rtfbeam
