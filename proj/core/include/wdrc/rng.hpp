#pragma once

#include <cstdint>
#include <random>

namespace wdrc::rng {

// Stream recipe (stable across platforms, relied upon by the calibration
// tests): every randomized component derives an independent substream from
// (base seed, tag...) via splitmix64 and feeds it to std::mt19937_64, whose
// output sequence is fully specified by the C++ standard. std::*_distribution
// is avoided everywhere because its mapping is implementation-defined.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Fold one tag into a seed. substream(substream(seed, a), b) defines the
// (seed, a, b) stream.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (tag + 1)));
}

inline std::mt19937_64 engine(std::uint64_t seed) { return std::mt19937_64(seed); }

// Uniform index in [0, n): engine() % n. The modulo mapping is part of the
// documented recipe.
inline std::size_t index(std::mt19937_64& eng, std::size_t n) {
    return static_cast<std::size_t>(eng() % static_cast<std::uint64_t>(n));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller on the recipe above (used by synthetic
// fixtures; also deterministic).
inline double normal(std::mt19937_64& eng) {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform01(eng);
    const double u2 = uniform01(eng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

}  // namespace wdrc::rng
