#pragma once

#include <cstdint>
#include <random>

namespace rcr {

/// splitmix64 mixing step; used both as an RNG seeder and as a stable
/// hash for deriving independent per-sample seeds.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Seed for sample number `index` of a run keyed by `master`.  Results
/// are independent of scheduling because every sample owns its seed.
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x0DDB1A5E5BAD5EEDull));
}

inline std::mt19937_64 make_rng(uint64_t seed) {
    return std::mt19937_64(splitmix64(seed));
}

}  // namespace rcr
