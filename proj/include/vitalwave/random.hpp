#pragma once

#include <cmath>
#include <cstdint>

namespace vitalwave {

/// Seedable pseudo-random generator with a fully pinned algorithm so other
/// implementations can reproduce the exact streams:
///
///   * integer stream: SplitMix64 (Steele, Lea & Flood 2014) — state advances
///     by 0x9E3779B97F4A7C15, output is the usual 64-bit finalizer;
///   * uniform doubles: top 53 bits scaled by 2^-53, giving values in [0, 1);
///   * normal deviates: polar-free Box–Muller on consecutive uniforms,
///     u1 drawn strictly positive, returning sqrt(-2 ln u1) * cos(2 pi u2)
///     first and the matching sine term on the next call.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal deviate.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

  /// Independent child stream; used to decouple e.g. beat timing from
  /// per-channel noise so adding a channel never shifts another stream.
  Rng fork(std::uint64_t stream_tag) const {
    Rng child(state_ ^ (0xD1B54A32D192ED03ULL * (stream_tag + 1)));
    return child;
  }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace vitalwave
