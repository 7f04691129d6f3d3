#pragma once

#include <cstdint>

namespace rhyme {

// Selects between the OpenMP kernel and its serial reference. Both paths
// must produce identical results; tests compare them.
enum class Execution { serial, parallel };

// SplitMix64 finalizer; used to derive independent RNG seeds from a master
// seed and job coordinates.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) noexcept {
  return mix_seed(mix_seed(mix_seed(master) ^ a) ^ (b * 0xD1B54A32D192ED03ULL));
}

}  // namespace rhyme
