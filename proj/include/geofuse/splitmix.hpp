#pragma once

#include <cmath>
#include <cstdint>

namespace geofuse {

/// SplitMix64 (Steele, Lea & Flood; Vigna's fixed-increment variant).
/// The exact update/mix constants are load-bearing: subset plans and seeded
/// initializers must reproduce bit-for-bit across platforms and languages.
class SplitMix64 {
public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += UINT64_C(0x9E3779B97F4A7C15));
    z = (z ^ (z >> 30)) * UINT64_C(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)) * UINT64_C(0x94D049BB133111EB);
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection sampling (arc4random_uniform
  /// style): draw until the 64-bit value is >= 2^64 mod bound, then reduce.
  uint64_t bounded(uint64_t bound) {
    if (bound < 2) return 0;
    uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (cosine branch only; one draw per call).
  double next_normal() {
    double u = next_double();
    if (u <= 0.0) u = 0x1.0p-53;
    double v = next_double();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * 3.14159265358979323846 * v);
  }

private:
  uint64_t state_;
};

}  // namespace geofuse
