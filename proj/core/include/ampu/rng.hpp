#pragma once

#include <cstdint>
#include <random>

namespace ampu {

// splitmix64 finalizer; good avalanche, used to mix stream identifiers
// into independent seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Derives an independent, reproducible RNG stream from a master seed and up
// to three stream coordinates (e.g. trial index, object index). Each distinct
// coordinate tuple yields a statistically independent generator, so trials
// can be dispatched to workers in any order without affecting results.
inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t a = 0,
                                   std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix64(master);
    s = mix64(s ^ mix64(a + 0x1ULL));
    s = mix64(s ^ mix64(b + 0x2ULL));
    s = mix64(s ^ mix64(c + 0x3ULL));
    return std::mt19937_64(s);
}

}  // namespace ampu
