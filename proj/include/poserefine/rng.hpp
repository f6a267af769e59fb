#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Seeded, portable randomness. The generator is std::mt19937_64 (its output
// sequence is fixed by the standard); every distribution transform is
// implemented here by hand because the std::*_distribution adaptors are
// allowed to differ between standard libraries. Identical seeds therefore
// produce identical streams on every platform.

namespace poserefine {

using Rng = std::mt19937_64;

/// splitmix64 mix. Used to derive independent sub-stream seeds from a base
/// seed and a purpose tag.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline Rng make_rng(uint64_t seed, uint64_t stream = 0) {
    return Rng(mix_seed(seed, stream));
}

/// Uniform double in [0, 1), 53-bit resolution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + uniform01(rng) * (hi - lo);
}

/// Standard normal via Box-Muller (cosine branch; the second value is
/// discarded so each draw consumes exactly two generator outputs).
inline double normal(Rng& rng, double mean, double sd) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Uniform index in [0, n). Modulo reduction: the bias is ~n/2^64,
/// irrelevant at dataset scales, and the result is platform-stable.
inline size_t uniform_index(Rng& rng, size_t n) {
    return static_cast<size_t>(rng() % static_cast<uint64_t>(n));
}

/// In-place Fisher-Yates shuffle using uniform_index.
template <typename T>
void shuffle(Rng& rng, std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
        const size_t j = uniform_index(rng, i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace poserefine
