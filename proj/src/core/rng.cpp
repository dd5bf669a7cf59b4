#include "mno/core/rng.hpp"

namespace mno {

std::uint64_t mix_seed(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void fill_standard_normal(Rng& rng, std::span<double> out) {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& v : out) v = dist(rng);
}

}  // namespace mno
