#pragma once

#include <cmath>
#include <cstdint>

namespace kpinn {

// SplitMix64 (Steele/Lea/Flood). Counter-based, 64-bit seeded, identical
// output on every platform. All sampling and initialization in this project
// draws from it so runs are reproducible bit-for-bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1) with 53 random bits
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Box-Muller; two fresh draws per call, no cache,
  // so the stream position is a pure function of the call count
  double normal() {
    double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // unbiased integer in [0, n) by rejection
  std::uint64_t bounded(std::uint64_t n) {
    std::uint64_t threshold = (0ULL - n) % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  std::uint64_t state_;
};

// one-shot mix, used to derive independent sub-seeds
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 g(a ^ (0x9E3779B97F4A7C15ULL + (b << 6) + (b >> 2)));
  g.next();
  return g.next();
}

}  // namespace kpinn
