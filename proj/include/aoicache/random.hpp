#pragma once

#include <cstdint>
#include <random>

namespace aoicache {

/// splitmix64 finalizer; mixes a 64-bit value into a well-distributed seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent substream seed for (seed, stream, salt).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t salt = 0) {
    return mix64(mix64(seed ^ mix64(salt)) ^ stream);
}

using Rng = std::mt19937_64;

}  // namespace aoicache
