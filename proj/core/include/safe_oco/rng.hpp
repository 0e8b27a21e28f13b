#pragma once

#include <cstdint>
#include <random>

namespace safe_oco {

using Rng = std::mt19937_64;

/// Independent streams keyed by purpose so cost, noise and algorithm draws
/// never share state.
enum class StreamPurpose : std::uint64_t { Cost = 1, Noise = 2, Algorithm = 3, Test = 4 };

inline Rng make_stream(std::uint64_t seed, std::uint64_t trial, StreamPurpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace safe_oco
