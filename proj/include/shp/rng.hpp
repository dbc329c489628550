#pragma once

#include <cstdint>
#include <random>

namespace shp {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent child seeds from a root seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for sub-stream `stream` (a component tag) and index `index` of a root seed.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0) noexcept {
    return mix_seed(mix_seed(root ^ mix_seed(stream)) + index);
}

// Poisson draw that accepts a zero mean.
template <class Engine>
std::int64_t draw_poisson(Engine& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    return std::poisson_distribution<std::int64_t>(mean)(rng);
}

}  // namespace shp
