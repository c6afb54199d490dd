#pragma once

#include <cstdint>
#include <random>

namespace rectdim {

/// SplitMix64 finalizer; spreads nearby seeds across the whole state space.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for (stream, attempt) derived from a base seed. Independent of how
/// work is scheduled, so parallel runs reproduce serial ones.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t attempt = 0) noexcept {
    return mix64(mix64(mix64(base) ^ stream) + attempt);
}

using Engine = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits; portable across standard
/// libraries, unlike std::uniform_real_distribution.
inline double uniform01(Engine& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [lo, hi] by rejection; portable.
inline std::int64_t uniform_int(Engine& rng, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(rng());
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return lo + static_cast<std::int64_t>(v % span);
}

}  // namespace rectdim
