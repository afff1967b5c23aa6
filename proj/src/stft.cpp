#include "rtfbeam/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace rtfbeam {

namespace {

// FFTW plan creation is not thread-safe; execution on private buffers is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    fwd_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_1d(n, out_, in_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* time() { return in_; }
  Complex* freq() { return reinterpret_cast<Complex*>(out_); }
  void forward() { fftw_execute(fwd_); }
  // Unnormalized; caller divides by n. Destroys the frequency buffer.
  void inverse() { fftw_execute(inv_); }
  int size() const { return n_; }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan fwd_, inv_;
};

std::vector<double> make_window(const StftConfig& cfg) {
  // Periodic sqrt-Hann: w[n] = sin(pi n / L). Satisfies the overlap-add
  // identity sum_k w^2[n - k*shift] = L/(2*shift) for shift | L.
  std::vector<double> w(cfg.frame_length);
  for (int n = 0; n < cfg.frame_length; ++n)
    w[n] = std::sin(std::numbers::pi * n / cfg.frame_length);
  return w;
}

}  // namespace

void StftConfig::validate() const {
  if (frame_length <= 0 || frame_shift <= 0 || sample_rate <= 0.0)
    throw Error(ErrorCode::dimension_mismatch, "non-positive STFT parameter");
  if (frame_length % frame_shift != 0)
    throw Error(ErrorCode::dimension_mismatch,
                "frame_shift must divide frame_length");
}

Spectrogram Spectrogram::channel(int m) const {
  Spectrogram out(frames_, bins_, 1);
  for (int t = 0; t < frames_; ++t)
    for (int f = 0; f < bins_; ++f) out.at(t, f, 0) = at(t, f, m);
  return out;
}

Spectrogram operator+(const Spectrogram& a, const Spectrogram& b) {
  if (a.frames() != b.frames() || a.bins() != b.bins() ||
      a.channels() != b.channels())
    throw Error(ErrorCode::dimension_mismatch, "spectrogram sizes differ");
  Spectrogram out = a;
  for (std::size_t i = 0; i < out.raw().size(); ++i) out.raw()[i] += b.raw()[i];
  return out;
}

SegmentSchedule make_schedule(double t1, double t2, double t_end,
                              const StftConfig& cfg) {
  if (!(0.0 < t1 && t1 < t2 && t2 < t_end))
    throw Error(ErrorCode::invalid_schedule,
                "segment boundaries must satisfy 0 < t1 < t2 < t_end");
  SegmentSchedule s;
  s.single_start_sample = std::llround(t1 * cfg.sample_rate);
  s.dual_start_sample = std::llround(t2 * cfg.sample_rate);
  s.end_sample = std::llround(t_end * cfg.sample_rate);

  const int total = cfg.frame_count(s.end_sample);
  auto inside = [&](std::int64_t lo, std::int64_t hi) {
    // Frames whose sample span lies entirely inside [lo, hi).
    FrameRange r;
    int t = 0;
    while (t < total && cfg.frame_span(t).first < lo) ++t;
    r.first = t;
    while (t < total && cfg.frame_span(t).second <= hi) ++t;
    r.last = t;
    return r;
  };
  s.noise_only = inside(0, s.single_start_sample);
  s.single_speaker = inside(s.single_start_sample, s.dual_start_sample);
  s.dual_speaker = inside(s.dual_start_sample, s.end_sample);
  if (s.noise_only.size() <= 0 || s.single_speaker.size() <= 0 ||
      s.dual_speaker.size() <= 0)
    throw Error(ErrorCode::invalid_schedule,
                "a segment holds no complete STFT frame");
  return s;
}

Spectrogram analyze(const SampleMatrix& signal, const StftConfig& cfg) {
  cfg.validate();
  const std::int64_t n = signal.rows();
  const int channels = static_cast<int>(signal.cols());
  if (n < cfg.frame_length || channels < 1)
    throw Error(ErrorCode::signal_too_short,
                "need at least one full frame of samples");

  const int L = cfg.frame_length;
  const int bins = cfg.bins();
  const int frames = cfg.frame_count(n);
  const std::vector<double> win = make_window(cfg);

  Spectrogram spec(frames, bins, channels);
  RealFft fft(L);
  for (int m = 0; m < channels; ++m) {
    for (int t = 0; t < frames; ++t) {
      const std::int64_t first = cfg.frame_span(t).first;
      for (int i = 0; i < L; ++i) {
        const std::int64_t idx = first + i;
        const double x = (idx >= 0 && idx < n) ? signal(idx, m) : 0.0;
        fft.time()[i] = win[i] * x;
      }
      fft.forward();
      for (int f = 0; f < bins; ++f) spec.at(t, f, m) = fft.freq()[f];
    }
  }
  return spec;
}

SampleMatrix synthesize(const Spectrogram& spec, const StftConfig& cfg,
                        std::int64_t n_samples) {
  cfg.validate();
  if (spec.bins() != cfg.bins())
    throw Error(ErrorCode::dimension_mismatch,
                "spectrogram bins do not match frame_length/2 + 1");
  const int L = cfg.frame_length;
  const int S = cfg.frame_shift;
  const int channels = spec.channels();
  const std::vector<double> win = make_window(cfg);

  // Padded output covers every frame span; the requested range is cut out at
  // the end. COLA normalization is accumulated alongside.
  const std::int64_t pad = L;
  const std::int64_t padded_len =
      static_cast<std::int64_t>(spec.frames() - 1) * S + L;
  SampleMatrix acc = SampleMatrix::Zero(padded_len, channels);
  Eigen::VectorXd wsum = Eigen::VectorXd::Zero(padded_len);

  RealFft fft(L);
  for (int m = 0; m < channels; ++m) {
    for (int t = 0; t < spec.frames(); ++t) {
      for (int f = 0; f < cfg.bins(); ++f) fft.freq()[f] = spec.at(t, f, m);
      fft.inverse();
      const std::int64_t base = static_cast<std::int64_t>(t) * S;
      for (int i = 0; i < L; ++i) {
        acc(base + i, m) += win[i] * fft.time()[i] / L;
        if (m == 0) wsum(base + i) += win[i] * win[i];
      }
    }
  }

  SampleMatrix out = SampleMatrix::Zero(n_samples, channels);
  const std::int64_t avail = std::min<std::int64_t>(n_samples, padded_len - pad);
  for (int m = 0; m < channels; ++m)
    for (std::int64_t i = 0; i < avail; ++i)
      if (wsum(i + pad) > 1e-12) out(i, m) = acc(i + pad, m) / wsum(i + pad);
  return out;
}

CMat sample_covariance(const Spectrogram& spec, int bin, FrameRange range) {
  if (range.size() <= 0 || range.first < 0 || range.last > spec.frames() ||
      bin < 0 || bin >= spec.bins())
    throw Error(ErrorCode::empty_range, "frame range empty or out of bounds");
  const int m = spec.channels();
  CMat acc = CMat::Zero(m, m);
  for (int t = range.first; t < range.last; ++t) {
    const auto y = spec.frame_vec(t, bin);
    acc.noalias() += y * y.adjoint();
  }
  acc /= static_cast<double>(range.size());
  return 0.5 * (acc + acc.adjoint());
}

}  // namespace rtfbeam
