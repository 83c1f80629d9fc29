#pragma once

#include <cstdint>

namespace cbsim {

/// Counter-based pseudo-random generator (splitmix64).
///
/// Every stochastic component of the library draws from this generator so
/// that results are reproducible bit-for-bit from the recorded seeds, on any
/// platform and in any reimplementation of the file formats. The algorithm
/// is the public-domain splitmix64 finalizer: output i of a generator seeded
/// with s is mix64(s + (i+1) * 0x9e3779b97f4a7c15).
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() { return mix64(state_ += kGamma); }

  /// Uniform value in [0, n). Unbiased: draws are rejected while below
  /// 2^64 mod n, then reduced modulo n.
  std::uint64_t bounded(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % n;
    }
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

/// Child seed i of a master seed: the (i+1)-th raw output of splitmix64
/// seeded with the master. Used for per-user, per-repeat, and per-step
/// derived streams so parallel generation stays deterministic.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return SplitMix64::mix64(master + (index + 1) * SplitMix64::kGamma);
}

}  // namespace cbsim
