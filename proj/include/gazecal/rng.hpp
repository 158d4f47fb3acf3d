#pragma once

#include <cstdint>

namespace gazecal {

// Counter-based pinned PRNG.
//
// Every draw is the SplitMix64 finalizer applied to key + counter * GAMMA,
// i.e. a pure function of (key, counter). Streams are split by deriving a
// fresh key from (seed, stream index) with a second odd constant, so any
// sample's stream can be regenerated in isolation and in parallel. The
// algorithm is fixed; dumps produced from a seed are reproducible bit-for-bit
// on any platform.
struct CounterRng {
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  std::uint64_t key = 0;
  std::uint64_t counter = 0;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix(key + (++counter) * kGamma); }

  // Uniform draw strictly inside (0, 1): 53 random bits at the cell midpoint.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased uniform draw in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * ((~std::uint64_t{0} / bound));
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % bound;
  }
};

// Stream for one sample (or one named purpose) under a master seed.
inline CounterRng substream(std::uint64_t seed, std::uint64_t index) {
  constexpr std::uint64_t kStreamGamma = 0xD1B54A32D192ED03ull;
  return CounterRng{CounterRng::mix(seed + (index + 1) * kStreamGamma), 0};
}

}  // namespace gazecal
