#include "rtfbeam/scenario.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

namespace rtfbeam {

namespace {

double distance(const Position& a, const Position& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// -6 dB/octave above 500 Hz, flat below.
double spectral_tilt(double f_hz) {
  return f_hz <= 500.0 ? 1.0 : 500.0 / f_hz;
}

// Fraction of direct-path energy carried by the reflection sum.
constexpr double kReflectionEnergyRatio = 0.5;

}  // namespace

void ArrayGeometry::validate() const {
  if (channels() < 2)
    throw Error(ErrorCode::dimension_mismatch, "need at least 2 microphones");
  if (reference_index < 0 || reference_index >= channels())
    throw Error(ErrorCode::dimension_mismatch, "reference index out of range");
  if (speed_of_sound <= 0.0)
    throw Error(ErrorCode::dimension_mismatch, "speed of sound must be positive");
}

ArrayGeometry ArrayGeometry::linear(int count, double spacing_m, int reference) {
  ArrayGeometry g;
  g.reference_index = reference;
  const double mid = 0.5 * (count - 1);
  for (int m = 0; m < count; ++m)
    g.mic_positions.push_back({(m - mid) * spacing_m, 0.0, 0.0});
  return g;
}

void ScenarioConfig::validate() const {
  geometry.validate();
  if (distance(target_position, interferer_position) <= 0.0)
    throw Error(ErrorCode::invalid_schedule,
                "target and interferer positions must be distinct");
  if (!std::isfinite(snr_db) || !std::isfinite(sir_db))
    throw Error(ErrorCode::invalid_schedule, "SNR/SIR must be finite");
  if (reflections < 0 || decay < 0.0)
    throw Error(ErrorCode::invalid_schedule, "reflections/decay must be nonnegative");
  if (interferer_level_change_min_db < 0.0 ||
      interferer_level_change_max_db < interferer_level_change_min_db)
    throw Error(ErrorCode::invalid_schedule, "bad interferer level-change range");
}

std::vector<CVec> synth_rtf(const ArrayGeometry& geometry, const Position& source,
                            int reflections, double decay, Rng& rng,
                            const StftConfig& stft) {
  geometry.validate();
  const int channels = geometry.channels();
  const int ref = geometry.reference_index;
  const double c = geometry.speed_of_sound;

  std::vector<double> dist(channels);
  for (int m = 0; m < channels; ++m) {
    dist[m] = distance(source, geometry.mic_positions[m]);
    if (dist[m] < 1e-6)
      throw Error(ErrorCode::source_on_microphone,
                  "source collocated with microphone " + std::to_string(m));
  }

  // Frequency-invariant path set, evaluated at every bin: one direct path per
  // microphone plus `reflections` random delayed paths with complex per-mic
  // amplitudes whose energy decays exponentially in delay.
  std::vector<double> refl_delay(reflections);
  std::vector<double> refl_weight(reflections);
  double weight_sum = 0.0;
  for (int k = 0; k < reflections; ++k) {
    refl_delay[k] = rng.uniform(0.0, 0.03);
    refl_weight[k] = std::exp(-decay * refl_delay[k]);
    weight_sum += refl_weight[k];
  }
  CMat refl_amp(channels, reflections);
  for (int k = 0; k < reflections; ++k) {
    const double var =
        weight_sum > 0.0
            ? kReflectionEnergyRatio * refl_weight[k] / weight_sum
            : 0.0;
    const double sd = std::sqrt(var);
    for (int m = 0; m < channels; ++m)
      refl_amp(m, k) = sd / dist[m] * rng.cnormal();
  }

  const int bins = stft.bins();
  std::vector<CVec> rtf(bins);
  for (int b = 0; b < bins; ++b) {
    const double f = stft.bin_frequency(b);
    CVec a(channels);
    for (int m = 0; m < channels; ++m) {
      const double tau = dist[m] / c;
      a(m) = std::polar(1.0 / dist[m], -2.0 * std::numbers::pi * f * tau);
      for (int k = 0; k < reflections; ++k)
        a(m) += refl_amp(m, k) *
                std::polar(1.0, -2.0 * std::numbers::pi * f * (tau + refl_delay[k]));
    }
    a /= a(ref);
    a(ref) = Complex(1.0, 0.0);
    rtf[b] = std::move(a);
  }
  return rtf;
}

CMat diffuse_coherence(const ArrayGeometry& geometry, double f_hz) {
  const int channels = geometry.channels();
  const double c = geometry.speed_of_sound;
  CMat gamma(channels, channels);
  for (int i = 0; i < channels; ++i) {
    for (int j = 0; j < channels; ++j) {
      const double d = distance(geometry.mic_positions[i], geometry.mic_positions[j]);
      const double x = 2.0 * std::numbers::pi * f_hz * d / c;
      gamma(i, j) = (x == 0.0) ? 1.0 : std::sin(x) / x;
    }
  }
  return gamma;
}

CoherenceModel diffuse_coherence_factor(const ArrayGeometry& geometry, double f_hz,
                                        double floor_eig) {
  const CMat gamma = diffuse_coherence(geometry, f_hz);
  Eigen::SelfAdjointEigenSolver<CMat> eig(gamma);
  const RVec lam = eig.eigenvalues().cwiseMax(floor_eig);
  CoherenceModel model;
  model.factor = eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
  model.coherence = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();
  model.coherence = 0.5 * (model.coherence + model.coherence.adjoint());
  return model;
}

RenderedScenario render_scenario(const ScenarioConfig& cfg, const StftConfig& stft) {
  return render_scenario(cfg, stft, std::nullopt, std::nullopt);
}

RenderedScenario render_scenario(const ScenarioConfig& cfg, const StftConfig& stft,
                                 const std::optional<Eigen::VectorXd>& target_source,
                                 const std::optional<Eigen::VectorXd>& interferer_source) {
  cfg.validate();
  stft.validate();
  const SegmentSchedule schedule = make_schedule(
      cfg.schedule_seconds[0], cfg.schedule_seconds[1], cfg.schedule_seconds[2], stft);

  const int channels = cfg.geometry.channels();
  const int ref = cfg.geometry.reference_index;
  const int bins = stft.bins();
  const int frames = stft.frame_count(schedule.end_sample);

  Rng rng_h(derive_seed(cfg.seed, 1));
  Rng rng_g(derive_seed(cfg.seed, 2));
  Rng rng_misc(derive_seed(cfg.seed, 3));

  GroundTruth truth;
  truth.reference_index = ref;
  truth.h = synth_rtf(cfg.geometry, cfg.target_position, cfg.reflections, cfg.decay,
                      rng_h, stft);
  truth.g = synth_rtf(cfg.geometry, cfg.interferer_position, cfg.reflections,
                      cfg.decay, rng_g, stft);
  truth.phi_x.assign(bins, {0.0, 0.0, 0.0});
  truth.phi_u.assign(bins, {0.0, 0.0, 0.0});
  truth.noise_cov.resize(bins);
  truth.x = Spectrogram(frames, bins, channels);
  truth.u = Spectrogram(frames, bins, channels);
  truth.n = Spectrogram(frames, bins, channels);

  // Interferer level step between segments 2 and 3.
  double gain3 = 1.0;
  if (cfg.interferer_level_change_max_db > 0.0) {
    const double mag = rng_misc.uniform(cfg.interferer_level_change_min_db,
                                        cfg.interferer_level_change_max_db);
    const double sign = rng_misc.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    gain3 = std::pow(10.0, sign * mag / 20.0);
  }

  // Optional caller-provided reference signals, analyzed once.
  std::optional<Spectrogram> target_spec, interferer_spec;
  if (target_source) {
    SampleMatrix s(target_source->size(), 1);
    s.col(0) = *target_source;
    target_spec = analyze(s, stft);
  }
  if (interferer_source) {
    SampleMatrix s(interferer_source->size(), 1);
    s.col(0) = *interferer_source;
    interferer_spec = analyze(s, stft);
  }
  auto wav_coeff = [](const Spectrogram& s, int rel_frame, int bin) {
    return s.at(rel_frame % s.frames(), bin, 0);
  };

  const FrameRange single = schedule.single_speaker;
  const FrameRange dual = schedule.dual_speaker;

  for (int b = 0; b < bins; ++b) {
    const double tilt = spectral_tilt(stft.bin_frequency(b));
    Rng rng_x(derive_seed(cfg.seed, 10, static_cast<std::uint64_t>(b)));
    Rng rng_u(derive_seed(cfg.seed, 11, static_cast<std::uint64_t>(b)));
    Rng rng_n(derive_seed(cfg.seed, 12, static_cast<std::uint64_t>(b)));

    const CoherenceModel noise_model =
        diffuse_coherence_factor(cfg.geometry, stft.bin_frequency(b));

    for (int t = dual.first; t < dual.last; ++t) {
      const Complex s = target_spec
                            ? wav_coeff(*target_spec, t - dual.first, b)
                            : tilt * rng_x.cnormal();
      truth.x.frame_vec(t, b) = truth.h[b] * s;
    }
    for (int t = single.first; t < single.last; ++t) {
      const Complex s = interferer_spec
                            ? wav_coeff(*interferer_spec, t - single.first, b)
                            : tilt * rng_u.cnormal();
      truth.u.frame_vec(t, b) = truth.g[b] * s;
    }
    for (int t = dual.first; t < dual.last; ++t) {
      const Complex s = interferer_spec
                            ? gain3 * wav_coeff(*interferer_spec,
                                                t - single.first, b)
                            : gain3 * tilt * rng_u.cnormal();
      truth.u.frame_vec(t, b) = truth.g[b] * s;
    }
    for (int t = 0; t < frames; ++t)
      truth.n.frame_vec(t, b) = noise_model.factor * rng_n.cnormal_vec(channels);

    truth.phi_x[b] = {0.0, 0.0, tilt * tilt};
    truth.phi_u[b] = {0.0, tilt * tilt, gain3 * gain3 * tilt * tilt};
    truth.noise_cov[b] = noise_model.coherence;
  }

  // Broadband per-frame powers at the reference channel, each over the
  // component's active frames.
  auto ref_power = [&](const Spectrogram& s, std::vector<FrameRange> ranges) {
    double acc = 0.0;
    int count = 0;
    for (const FrameRange& r : ranges) {
      for (int t = r.first; t < r.last; ++t)
        for (int b = 0; b < bins; ++b) acc += std::norm(s.at(t, b, ref));
      count += r.size();
    }
    return acc / std::max(count, 1);
  };
  const double p_x = ref_power(truth.x, {dual});
  const double p_u = ref_power(truth.u, {single, dual});
  const double p_n = ref_power(truth.n, {FrameRange{0, frames}});
  if (!(p_x > 0.0) || !(p_u > 0.0) || !(p_n > 0.0))
    throw Error(ErrorCode::invalid_schedule, "a rendered component has zero power");

  const double scale_u = std::sqrt(p_x / p_u * std::pow(10.0, -cfg.sir_db / 10.0));
  const double scale_n = std::sqrt(p_x / p_n * std::pow(10.0, -cfg.snr_db / 10.0));
  for (Complex& v : truth.u.raw()) v *= scale_u;
  for (Complex& v : truth.n.raw()) v *= scale_n;
  for (int b = 0; b < bins; ++b) {
    truth.phi_u[b][1] *= scale_u * scale_u;
    truth.phi_u[b][2] *= scale_u * scale_u;
    truth.noise_cov[b] *= scale_n * scale_n;
  }
  // With caller-provided sources the model PSDs are the empirical per-bin
  // means over the active frames.
  if (target_spec || interferer_spec) {
    for (int b = 0; b < bins; ++b) {
      if (target_spec) {
        double acc = 0.0;
        for (int t = dual.first; t < dual.last; ++t)
          acc += std::norm(truth.x.at(t, b, ref));
        truth.phi_x[b][2] = acc / dual.size();
      }
      if (interferer_spec) {
        double acc2 = 0.0, acc3 = 0.0;
        for (int t = single.first; t < single.last; ++t)
          acc2 += std::norm(truth.u.at(t, b, ref));
        for (int t = dual.first; t < dual.last; ++t)
          acc3 += std::norm(truth.u.at(t, b, ref));
        truth.phi_u[b][1] = acc2 / single.size();
        truth.phi_u[b][2] = acc3 / dual.size();
      }
    }
  }

  RenderedScenario out;
  out.mix = truth.x + truth.u + truth.n;
  out.truth = std::move(truth);
  out.schedule = schedule;
  return out;
}

OracleCovariances oracle_covariances(const GroundTruth& truth, int bin, int segment) {
  if (segment < 1 || segment > 3)
    throw Error(ErrorCode::invalid_schedule, "segment must be 1, 2, or 3");
  if (bin < 0 || bin >= static_cast<int>(truth.h.size()))
    throw Error(ErrorCode::empty_range, "bin out of range");
  const CVec& h = truth.h[bin];
  const CVec& g = truth.g[bin];
  OracleCovariances oc;
  oc.R_x = truth.phi_x[bin][segment - 1] * (h * h.adjoint());
  oc.R_u = truth.phi_u[bin][segment - 1] * (g * g.adjoint());
  oc.R_n = truth.noise_cov[bin];
  oc.R_v = oc.R_u + oc.R_n;
  oc.R_y = oc.R_x + oc.R_v;
  return oc;
}

}  // namespace rtfbeam
