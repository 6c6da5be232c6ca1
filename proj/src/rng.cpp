#include "seqquant/rng.hpp"

namespace seqquant {

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t index) noexcept {
  return SplitMix64(mix(seed ^ mix(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace seqquant
