#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace macnet {

using Engine = std::mt19937_64;

/// SplitMix64 finaliser; a bijective 64-bit mixer.
inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for the substream identified by (seed, keys...). Streams for
/// different keys are independent of the order in which they are consumed.
inline std::uint64_t substream_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Engine substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  return Engine(substream_seed(seed, keys));
}

}  // namespace macnet
