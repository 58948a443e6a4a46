// random.hpp - Deterministic per-task random substreams

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qprobe {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Engine for the task identified by `path` under `root_seed`. The stream
// depends only on (root_seed, path), never on scheduling order.
inline Rng substream(std::uint64_t root_seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix64(root_seed);
    for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p + 0x632be59bd9b4e019ULL));
    return Rng(h);
}

}  // namespace qprobe
