// Seeded RNG helpers. Sub-streams are derived with splitmix64 so per-bin and
// per-cell work can run in parallel with results independent of scheduling.
#pragma once

#include <cstdint>
#include <random>

#include "rtfbeam/numerics.hpp"

namespace rtfbeam {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic stream id: seed combined with up to three indices.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(seed ^ splitmix64(a));
  s = splitmix64(s ^ splitmix64(b + 0x517cc1b727220a95ULL));
  return splitmix64(s ^ splitmix64(c + 0x2545f4914f6cdd1dULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen_);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }

  // Circular complex Gaussian, E|z|^2 = 1.
  Complex cnormal() {
    return Complex(normal(), normal()) * 0.7071067811865476;
  }

  CVec cnormal_vec(Eigen::Index n) {
    CVec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cnormal();
    return v;
  }

  CMat cnormal_mat(Eigen::Index r, Eigen::Index c) {
    CMat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index i = 0; i < r; ++i) m(i, j) = cnormal();
    return m;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace rtfbeam
