#pragma once

#include <cstdint>

namespace skewifs {

// SplitMix64 finalizer. Used as a counter-based generator: every random bit,
// symbol or seed in the library is a pure function of (seed, index), so any
// element of a stream can be read without replaying the stream and results do
// not depend on how work is split between threads.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return splitmix64(seed ^ splitmix64(value + 0x632BE59BD9B4E019ULL));
}

// Seed for substream `index` of purpose `stream` under a user seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index) noexcept {
  return hash_combine(hash_combine(seed, stream), index);
}

// Uniform integer in [0, bound) from a 64-bit hash (multiply-high reduction).
constexpr int uniform_below(std::uint64_t h, int bound) noexcept {
  return static_cast<int>((static_cast<unsigned __int128>(h) * static_cast<unsigned>(bound)) >> 64);
}

// Uniform double in [0, 1) with 53 random bits.
constexpr double uniform_unit(std::uint64_t h) noexcept {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace skewifs
