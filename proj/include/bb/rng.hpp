#pragma once

#include <cstdint>
#include <random>

namespace bb {

/// splitmix64 finalizer; used to derive independent per-task seeds from a
/// master seed so that results do not depend on execution order.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a) {
    return mix64(mix64(seed) ^ mix64(a));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix64(derive_seed(seed, a) ^ mix64(b ^ 0xd6e8feb86659fd93ULL));
}

using Rng = std::mt19937_64;

}  // namespace bb
