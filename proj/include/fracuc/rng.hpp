#pragma once

// Deterministic stream splitting: every replication / optimizer start gets
// its own generator derived from (base seed, counter), so results do not
// depend on thread scheduling.

#include <cstdint>
#include <random>

namespace fracuc {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t counter) {
    return splitmix64(splitmix64(base) ^ (0x9e3779b97f4a7c15ULL * (counter + 1)));
}

inline std::mt19937_64 make_stream(std::uint64_t base, std::uint64_t counter) {
    return std::mt19937_64(derive_seed(base, counter));
}

}  // namespace fracuc
