#pragma once

#include <cmath>
#include <cstdint>

#include "znl/common.hpp"

namespace znl {

// Counter-based noise stream. Every normal variate is a pure function of
// (master_seed, path_index, step k, coordinate slot), so ensembles can be
// evaluated in any order, on any number of workers, with identical output.
//
// The mixer is the SplitMix64 finalizer applied as a chain over the four
// inputs:
//
//   mix64(z): z += 0x9e3779b97f4a7c15
//             z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
//             z = (z ^ (z >> 27)) * 0x94d049bb133111eb
//             return z ^ (z >> 31)
//
//   word(seed, path, k, slot) = mix64(mix64(mix64(mix64(seed) ^ path) ^ k) ^ slot)
//
// Two words (slots 2*coord and 2*coord+1) feed a Box-Muller transform;
// the cosine branch is kept.

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t counter_word(std::uint64_t seed, std::uint64_t path,
                                            std::uint64_t k, std::uint64_t slot) {
    return mix64(mix64(mix64(mix64(seed) ^ path) ^ k) ^ slot);
}

/// Uniform in (0, 1]: top 53 bits, shifted so log() never sees zero.
inline double uniform01(std::uint64_t w) {
    return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

/// Standard normal variate for (seed, path, step k, coordinate).
inline double counter_normal(std::uint64_t seed, std::uint64_t path,
                             std::uint64_t k, std::uint64_t coord) {
    const double u1 = uniform01(counter_word(seed, path, k, 2 * coord));
    const double u2 = uniform01(counter_word(seed, path, k, 2 * coord + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace znl
