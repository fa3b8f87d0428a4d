#pragma once

#include <cstdint>
#include <random>

namespace vlia {

/// Deterministic RNG used everywhere in the project. Thin wrapper over
/// mt19937_64 with a seed-mixing constructor so that independent streams can
/// be derived from (seed, stream-id) pairs without correlation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(mix(seed, 0x9e3779b97f4a7c15ull)) {}
  Rng(uint64_t seed, uint64_t stream) : engine_(mix(seed, stream)) {}

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Inclusive integer range.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(engine_);
  }
  double gaussian(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

  /// SplitMix64-style avalanche; maps (seed, stream) to a well-spread state.
  static uint64_t mix(uint64_t a, uint64_t b) {
    uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace vlia
