#include "rtfbeam/wav.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace rtfbeam {

namespace {

struct Reader {
  std::ifstream in;
  explicit Reader(const std::string& path) : in(path, std::ios::binary) {
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
  }
  void bytes(void* dst, std::size_t n) {
    in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (!in) throw Error(ErrorCode::io_error, "truncated WAV file");
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, 4);
    return v;
  }
  std::uint16_t u16() {
    std::uint16_t v;
    bytes(&v, 2);
    return v;
  }
  std::string tag() {
    char c[4];
    bytes(c, 4);
    return std::string(c, 4);
  }
};

void put_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
void put_u16(std::ofstream& out, std::uint16_t v) {
  out.write(reinterpret_cast<const char*>(&v), 2);
}

}  // namespace

WavData read_wav(const std::string& path) {
  Reader r(path);
  if (r.tag() != "RIFF") throw Error(ErrorCode::io_error, "not a RIFF file");
  r.u32();  // riff size
  if (r.tag() != "WAVE") throw Error(ErrorCode::io_error, "not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::vector<char> payload;
  bool have_fmt = false, have_data = false;

  while (!have_data) {
    std::string id;
    {
      char c[4];
      r.in.read(c, 4);
      if (!r.in) break;
      id.assign(c, 4);
    }
    const std::uint32_t size = r.u32();
    if (id == "fmt ") {
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      if (size > 16) r.in.seekg(size - 16, std::ios::cur);
      have_fmt = true;
    } else if (id == "data") {
      payload.resize(size);
      r.bytes(payload.data(), size);
      have_data = true;
    } else {
      r.in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  if (!have_fmt || !have_data)
    throw Error(ErrorCode::io_error, "missing fmt or data chunk in " + path);
  if (channels == 0) throw Error(ErrorCode::io_error, "zero channels");

  const bool pcm16 = (format == 1 && bits == 16);
  const bool f32 = (format == 3 && bits == 32);
  if (!pcm16 && !f32)
    throw Error(ErrorCode::io_error,
                "unsupported WAV encoding (want 16-bit PCM or 32-bit float)");

  const std::size_t bytes_per = pcm16 ? 2 : 4;
  const std::size_t n_values = payload.size() / bytes_per;
  const std::size_t n_frames = n_values / channels;

  WavData out;
  out.sample_rate = rate;
  out.samples.resize(static_cast<Eigen::Index>(n_frames), channels);
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t k = (i * channels + c) * bytes_per;
      if (pcm16) {
        std::int16_t v;
        std::memcpy(&v, payload.data() + k, 2);
        out.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            static_cast<double>(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, payload.data() + k, 4);
        out.samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            static_cast<double>(v);
      }
    }
  }
  return out;
}

void write_wav(const std::string& path, const SampleMatrix& samples,
               double sample_rate, WavFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);

  const auto frames = samples.rows();
  const auto channels = samples.cols();
  const bool pcm16 = format == WavFormat::pcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(frames * channels * (bits / 8));

  out.write("RIFF", 4);
  put_u32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, pcm16 ? 1 : 3);
  put_u16(out, static_cast<std::uint16_t>(channels));
  put_u32(out, static_cast<std::uint32_t>(sample_rate));
  put_u32(out, static_cast<std::uint32_t>(sample_rate) * channels * (bits / 8));
  put_u16(out, static_cast<std::uint16_t>(channels * (bits / 8)));
  put_u16(out, bits);
  out.write("data", 4);
  put_u32(out, data_size);

  for (Eigen::Index i = 0; i < frames; ++i) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      const double x = samples(i, c);
      if (pcm16) {
        const double clipped = std::clamp(x, -1.0, 32767.0 / 32768.0);
        const std::int16_t v =
            static_cast<std::int16_t>(std::lround(clipped * 32768.0));
        out.write(reinterpret_cast<const char*>(&v), 2);
      } else {
        const float v = static_cast<float>(x);
        out.write(reinterpret_cast<const char*>(&v), 4);
      }
    }
  }
  if (!out) throw Error(ErrorCode::io_error, "short write to " + path);
}

}  // namespace rtfbeam
