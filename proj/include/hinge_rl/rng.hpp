#pragma once

#include <cmath>
#include <cstdint>

namespace hinge_rl {

/// Deterministic random source. Wraps a 64-bit PCG-style generator with
/// hand-rolled uniform/normal draws so sequences are identical across
/// standard libraries and platforms; every reproducibility contract in the
/// project rests on this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    state_ = seed + 0x9E3779B97F4A7C15ULL;
    // Warm up past low-entropy seeds.
    next_u64();
    next_u64();
  }

  /// Derive an independent stream, e.g. one per worker or per component.
  Rng spawn(std::uint64_t stream) const {
    return Rng(mix(state_ ^ mix(stream + 0x517CC1B727220A95ULL)));
  }

  std::uint64_t next_u64() {
    state_ = mix(state_ + 0x9E3779B97F4A7C15ULL);
    return state_;
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (deterministic, no cached spare).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace hinge_rl
