#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lensdepth {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of the substream identified by `path` under `seed`. Substreams are
// how parallel tasks get reproducible randomness at any thread count.
inline std::uint64_t substream_seed(std::uint64_t seed,
                                    std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(seed);
    for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

inline Rng substream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Rng(substream_seed(seed, path));
}

}  // namespace lensdepth
