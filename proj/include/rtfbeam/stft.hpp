// STFT analysis/synthesis (weighted overlap-add, square-root-Hann) and
// per-bin sample covariance estimation.
//
// Framing: analyze() zero-pads the signal by one frame at each end, so every
// input sample sits under a full complement of overlapping windows and
// synthesize(analyze(x)) reproduces x. Spectrogram frame t covers padded
// samples [t*shift, t*shift + frame_length), i.e. input samples
// [t*shift - frame_length, t*shift).
#pragma once

#include <cstdint>
#include <vector>

#include "rtfbeam/numerics.hpp"

namespace rtfbeam {

// Time-domain multichannel signal, one column per channel.
using SampleMatrix = Eigen::MatrixXd;

enum class Window { sqrt_hann };

struct StftConfig {
  int frame_length = 3200;  // 200 ms at 16 kHz
  int frame_shift = 800;    // 75% overlap
  double sample_rate = 16000.0;
  Window window = Window::sqrt_hann;

  int bins() const { return frame_length / 2 + 1; }
  double bin_frequency(int bin) const {
    return sample_rate * static_cast<double>(bin) / frame_length;
  }
  // Number of frames analyze() produces for n input samples.
  int frame_count(std::int64_t n) const {
    return static_cast<int>((n + frame_length) / frame_shift) + 1;
  }
  // Input-sample span [first, last) covered by frame t (may start negative:
  // leading frames reach into the zero padding).
  std::pair<std::int64_t, std::int64_t> frame_span(int t) const {
    const std::int64_t start =
        static_cast<std::int64_t>(t) * frame_shift - frame_length;
    return {start, start + frame_length};
  }
  void validate() const;
};

// frames x bins x channels complex STFT tensor; channel index is fastest.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(int frames, int bins, int channels)
      : frames_(frames), bins_(bins), channels_(channels),
        data_(static_cast<std::size_t>(frames) * bins * channels, Complex(0, 0)) {}

  int frames() const { return frames_; }
  int bins() const { return bins_; }
  int channels() const { return channels_; }

  Complex& at(int t, int f, int m) { return data_[offset(t, f, m)]; }
  const Complex& at(int t, int f, int m) const { return data_[offset(t, f, m)]; }

  // Length-M channel vector of one (frame, bin) cell.
  Eigen::Map<CVec> frame_vec(int t, int f) {
    return {data_.data() + offset(t, f, 0), channels_};
  }
  Eigen::Map<const CVec> frame_vec(int t, int f) const {
    return {data_.data() + offset(t, f, 0), channels_};
  }

  Spectrogram channel(int m) const;
  std::vector<Complex>& raw() { return data_; }
  const std::vector<Complex>& raw() const { return data_; }

 private:
  std::size_t offset(int t, int f, int m) const {
    return (static_cast<std::size_t>(t) * bins_ + f) * channels_ + m;
  }

  int frames_ = 0, bins_ = 0, channels_ = 0;
  std::vector<Complex> data_;
};

Spectrogram operator+(const Spectrogram& a, const Spectrogram& b);

// Half-open frame range [first, last).
struct FrameRange {
  int first = 0;
  int last = 0;
  int size() const { return last - first; }
  bool contains(int t) const { return t >= first && t < last; }
};

// Known segment boundaries of the successive-speaker scenario: noise-only
// (s=1), single-speaker (s=2), dual-speaker (s=3). Frame ranges contain only
// frames lying entirely inside their segment; sample ranges are the exact
// segment spans.
struct SegmentSchedule {
  FrameRange noise_only;
  FrameRange single_speaker;
  FrameRange dual_speaker;
  std::int64_t single_start_sample = 0;
  std::int64_t dual_start_sample = 0;
  std::int64_t end_sample = 0;
};

// Builds the schedule from boundary times {t1, t2, t_end} in seconds
// (segment 1 = [0,t1), segment 2 = [t1,t2), segment 3 = [t2,t_end)).
// Throws InvalidSchedule when boundaries are out of order or a segment holds
// no complete frame.
SegmentSchedule make_schedule(double t1, double t2, double t_end,
                              const StftConfig& cfg);

// Windowed one-sided FFT frames of a multichannel signal.
Spectrogram analyze(const SampleMatrix& signal, const StftConfig& cfg);

// Weighted overlap-add synthesis; inverse of analyze() on its output length.
// n_samples selects the output length (pass the original signal length).
SampleMatrix synthesize(const Spectrogram& spec, const StftConfig& cfg,
                        std::int64_t n_samples);

// (1/|range|) * sum_t y_t y_t^H at the given bin over the frame range.
CMat sample_covariance(const Spectrogram& spec, int bin, FrameRange range);

}  // namespace rtfbeam
