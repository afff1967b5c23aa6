// Minimal RIFF/WAVE reader and writer: 16-bit PCM and 32-bit float,
// any channel count. Samples are exchanged as a samples x channels matrix
// with values in [-1, 1].
#pragma once

#include <string>

#include "rtfbeam/stft.hpp"

namespace rtfbeam {

enum class WavFormat { pcm16, float32 };

struct WavData {
  SampleMatrix samples;
  double sample_rate = 16000.0;
};

WavData read_wav(const std::string& path);

void write_wav(const std::string& path, const SampleMatrix& samples,
               double sample_rate, WavFormat format = WavFormat::pcm16);

}  // namespace rtfbeam
