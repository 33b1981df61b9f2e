#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>

namespace cadeval::rng {

/// SplitMix64 stream: the state advances by the 64-bit golden-ratio constant
/// and each draw applies the murmur-style finalizer. The algorithm is spelled
/// out here in full, so a given (seed, stream) pair produces the same integer
/// and uniform sequences on every platform.
///
/// Substreams are decorrelated by scrambling the initial state with the
/// stream id. Bootstrap code gives each replicate its own stream, so
/// replicates can be evaluated in any order (or in parallel) without
/// changing the results.
class Stream {
 public:
  explicit Stream(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : state_(mix(seed + kGamma) ^ mix(stream * kGamma + 0x94D049BB133111EBull)) {}

  std::uint64_t next_u64() noexcept {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform double in [0, 1): top 53 bits scaled by 2^-53.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; used where log() must not see zero.
  double next_open_double() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Unbiased integer in [0, n). Rejection sampling on the low remainder
  /// zone removes modulo bias.
  std::uint64_t next_index(std::uint64_t n) noexcept {
    assert(n > 0);
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  double next_uniform(double lo, double hi) noexcept {
    return lo + next_double() * (hi - lo);
  }

  /// Standard normal deviate via Box-Muller. Consumes two draws. The integer
  /// stream is platform-exact; the transcendental step follows the platform
  /// libm in the last ulp.
  double next_normal() noexcept {
    const double u1 = next_open_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t state_;
};

}  // namespace cadeval::rng
