#pragma once

#include <cstdint>

namespace trv {

// splitmix64 finalizer (Steele/Lea/Flood); used both as the generator
// step and to derive independent per-sample streams from (seed, index)
// so that parallel sampling loops are order-independent.
inline std::uint64_t splitmix64_mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct rng {
    std::uint64_t state;

    explicit rng(std::uint64_t seed) : state(splitmix64_mix(seed)) {}

    // Independent stream for sample `index` of a run keyed by `seed`.
    rng(std::uint64_t seed, std::uint64_t index)
        : state(splitmix64_mix(splitmix64_mix(seed) ^ (0x9E3779B97F4A7C15ULL * (index + 1)))) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1) with 53 random bits.
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * u01(); }
};

} // namespace trv
