#pragma once

#include <cstdint>
#include <random>

namespace pricelab {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent sub-stream seeds. The stream id is mixed before being folded
// into the base seed so that nearby (seed, stream) pairs do not collide.
enum class Stream : std::uint64_t {
  kTruth = 1,
  kFeatures = 2,
  kNoise = 3,
  kPolicy = 4,
};

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base ^ mix64(stream * 0xd1b54a32d192ed03ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, Stream stream) {
  return derive_seed(base, static_cast<std::uint64_t>(stream));
}

// Uniform on the open interval (0, 1), 53 random bits.
inline double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_open01(rng);
}

}  // namespace pricelab
