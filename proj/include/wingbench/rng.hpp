#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace wingbench::rng {

// splitmix64 finalizer. Used only to derive substream seeds, never as the
// sampling engine itself.
inline uint64_t sm64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic substream derivation: the same (seed, a, b) always maps to the
// same child seed, so work can be partitioned (per row, per machine, per
// column) without one consumer's draw count perturbing another's.
inline uint64_t substream_seed(uint64_t seed, uint64_t a, uint64_t b = 0) {
  uint64_t s = sm64(seed ^ (0x9e3779b97f4a7c15ull * (a + 1)));
  return sm64(s ^ (0xbf58476d1ce4e5b9ull * (b + 1)));
}

// Thin wrapper over mt19937_64 with the handful of distributions the project
// needs, hand-rolled so that draw counts are explicit and stable. std::
// distributions are implementation-defined and would break cross-build
// reproducibility of generated datasets.
class Stream {
 public:
  explicit Stream(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Box-Muller, always consumes exactly two draws
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // rejection sampling; bounds are absolute, not standardized
  double truncated_normal(double mu, double sigma, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("truncated_normal: lo > hi");
    if (sigma <= 0.0) return std::min(std::max(mu, lo), hi);
    for (int it = 0; it < 100000; ++it) {
      double z = mu + sigma * normal();
      if (z >= lo && z <= hi) return z;
    }
    // unreachable for the sane bounds used here; keep the draw well-defined
    return std::min(std::max(mu, lo), hi);
  }

  // index in [0, n); floor(u*n) — bias of O(n * 2^-53) is irrelevant here
  std::size_t index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("index: n == 0");
    std::size_t i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i >= n ? n - 1 : i;
  }

 private:
  std::mt19937_64 eng_;
};

inline Stream substream(uint64_t seed, uint64_t a, uint64_t b = 0) {
  return Stream(substream_seed(seed, a, b));
}

}  // namespace wingbench::rng
