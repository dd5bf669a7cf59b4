#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mno {

using Rng = std::mt19937_64;

/// splitmix64 finalizer, used to decorrelate user seeds before stream derivation.
std::uint64_t mix_seed(std::uint64_t seed);

/// Seed of the i-th independent stream derived from a user seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) { return mix_seed(seed) ^ index; }

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

void fill_standard_normal(Rng& rng, std::span<double> out);

}  // namespace mno
