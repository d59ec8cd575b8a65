#pragma once

#include <cstdint>
#include <random>

namespace uaix {

using Rng = std::mt19937_64;

// Stream identifiers for seed splitting. Every random quantity in the
// pipeline is drawn from derive_seed(parent, stream, index...) so that a
// single global seed reproduces any partial computation on its own.
enum class Stream : std::uint64_t {
  Data = 1,
  Init = 2,
  Shuffle = 3,
  Dropout = 4,
  Posterior = 5,
  Relevance = 6,
  RandomBaseline = 7,
  Cluster = 8,
  Ensemble = 9,
};

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
  return mix64(mix64(parent) ^ (index * 0xD1B54A32D192ED03ull + 0x8CB92BA72F3D8DD7ull));
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream stream) noexcept {
  return derive_seed(parent, static_cast<std::uint64_t>(stream) + 0x5157000000000000ull);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, Stream stream, std::uint64_t index) noexcept {
  return derive_seed(derive_seed(parent, stream), index);
}

}  // namespace uaix
