#pragma once

#include <cstdint>
#include <random>

#include "thzmec/error.hpp"

namespace thzmec {

// Deterministic RNG wrapper. mt19937_64 output is bit-exact across platforms;
// the mapping helpers below avoid std::uniform_*_distribution, whose results
// are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double next_double() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Uniform index in [0, n), rejection-sampled so every index is equally likely.
  std::size_t next_index(std::size_t n) {
    require(n > 0, ErrorCode::invalid_argument, "next_index: n must be positive");
    const uint64_t threshold = (0 - static_cast<uint64_t>(n)) % n;
    uint64_t x = engine_();
    while (x < threshold) x = engine_();
    return static_cast<std::size_t>(x % n);
  }

  bool bernoulli(double p) { return next_double() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace thzmec
