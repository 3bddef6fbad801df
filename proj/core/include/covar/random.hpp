#pragma once

// Seeding and variate helpers shared by samplers and simulation drivers.

#include <cmath>
#include <cstdint>
#include <random>

#include "covar/numerics.hpp"

namespace covar::rng {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for the i-th task under a root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
    return splitmix64(root + 0x9E3779B97F4A7C15ULL * (index + 1));
}

/// Uniform on the open interval (0,1) with 53-bit resolution.
inline double open_uniform(Engine& g) {
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

inline double standard_normal(Engine& g) {
    return numerics::normal_quantile(open_uniform(g));
}

inline double standard_exponential(Engine& g) {
    return -std::log(open_uniform(g));
}

}  // namespace covar::rng
