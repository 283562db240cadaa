#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hetnet {

using Engine = std::mt19937_64;

// SplitMix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based stream derivation: the seed of a stream is the SplitMix64
// fold of (root, tag_0, tag_1, ...). Streams are addressed by their path, so
// trial i of sweep point j never depends on how many draws other trials made.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(root);
    for (std::uint64_t tag : path) s = splitmix64(s ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
    return s;
}

inline Engine make_stream(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    return Engine(derive_seed(root, path));
}

// Stream purposes, used as the second path element.
enum StreamTag : std::uint64_t {
    kTagDeployment = 1,
    kTagUsers = 2,
    kTagContention = 3,
    kTagConditioned = 4,
    kTagAux = 5,
};

} // namespace hetnet
