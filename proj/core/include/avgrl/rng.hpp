#pragma once

#include <cstdint>

namespace avgrl {

/// SplitMix64 (Steele, Lea & Flood 2014). Chosen over the <random> engines
/// plus distributions because the distributions are implementation-defined;
/// every draw here is specified bit-for-bit:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// uniform() maps the top 53 bits to [0, 1). split(k) seeds a child stream
/// with the mixed value of (seed, k), so child streams never share a state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Rejection sampling removes modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  /// Independent child stream identified by `stream`.
  Rng split(std::uint64_t stream) const {
    return Rng(mix(mix(seed_ ^ 0x6A09E667F3BCC909ULL) + mix(stream + 0x9E3779B97F4A7C15ULL)));
  }

  std::uint64_t seed() const { return seed_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

/// Named child streams used by the harness.
enum class Stream : std::uint64_t { kEnvironment = 1, kTransitions = 2, kAgent = 3, kProbes = 4 };

inline Rng split(const Rng& rng, Stream s) { return rng.split(static_cast<std::uint64_t>(s)); }

}  // namespace avgrl
