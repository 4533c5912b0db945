#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace pcrlab::rng {

// SplitMix64 finalizer; bijective on 64-bit words.
inline constexpr std::uint64_t finalize(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Keyed stream derivation: hash the seed together with an index tuple.
/// Distinct tuples give independent streams, so (seed, replicate, coordinate)
/// substreams can be generated in any order and in parallel.
inline constexpr std::uint64_t derive_key(std::uint64_t seed,
                                          std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = finalize(seed + kGolden);
  for (std::uint64_t w : words) {
    h = finalize(h ^ finalize(w + kGolden));
  }
  return h;
}

/// Counter-based generator: the state walks by the golden gamma and outputs
/// pass through the SplitMix64 finalizer.
class Stream {
 public:
  explicit constexpr Stream(std::uint64_t key) noexcept : state_(key) {}

  constexpr std::uint64_t next_u64() noexcept {
    state_ += kGolden;
    return finalize(state_);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log argument.
  double next_unit_pos() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller (cosine branch): exactly two uniforms per
  /// draw, no rejection, so every substream consumes a fixed budget.
  double next_gaussian() noexcept {
    const double u1 = next_unit_pos();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool next_bit() noexcept { return (next_u64() >> 63) != 0; }

 private:
  std::uint64_t state_;
};

// Stream tags keep the design, noise, rotation and harness substreams of one
// seed disjoint.
inline constexpr std::uint64_t kDesignTag = 0x01;
inline constexpr std::uint64_t kNoiseTag = 0x02;
inline constexpr std::uint64_t kRotationTag = 0x03;
inline constexpr std::uint64_t kRowTag = 0x04;
inline constexpr std::uint64_t kCheckTag = 0x05;

}  // namespace pcrlab::rng
