#pragma once

#include <cstdint>
#include <random>

namespace tcnlab {

using Rng = std::mt19937_64;

/// Independent random streams fanned out from one master seed.
enum class Stream : std::uint64_t {
  kInit = 1,
  kData = 2,
  kDropout = 3,
  kShuffle = 4,
  kVerify = 5,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for `stream`, optionally keyed by a counter (step, epoch, ...).
constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t counter = 0) {
  return mix64(mix64(mix64(master) ^ static_cast<std::uint64_t>(stream)) ^ counter);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t counter = 0) {
  return Rng(derive_seed(master, stream, counter));
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace tcnlab
