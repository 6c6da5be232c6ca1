#pragma once

#include <cstdint>
#include <limits>

namespace seqquant {

/// SplitMix64 (Steele, Lea, Flood 2014): a 64-bit counter passed through a
/// bijective mixer. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix(state_ += kGamma); }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Independent stream for one simulation run, a pure function of
  /// (seed, index) so results do not depend on how runs are scheduled.
  static SplitMix64 stream(std::uint64_t seed, std::uint64_t index) noexcept;

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t state_;
};

}  // namespace seqquant
