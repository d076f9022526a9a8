#pragma once

#include <cstdint>
#include <random>

namespace skewsurge {

using Rng = std::mt19937_64;

/// Uniform on (0,1), never exactly 0 or 1; identical across standard libraries.
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Mixes a seed with a stream id so derived streams are decorrelated.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace skewsurge
