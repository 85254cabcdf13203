#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "dopewolfe/int128.hpp"

namespace dopewolfe {

using Rng = std::mt19937_64;

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Deterministic child-seed derivation. Streams tagged with distinct paths
/// are independent: adding a new (trial, T, policy) cell never perturbs the
/// draws of an existing one.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = detail::mix64(master + 0x9e3779b97f4a7c15ULL);
  for (std::uint64_t t : tags)
    h = detail::mix64(h ^ (t + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
  return h;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
  return Rng(derive_seed(master, tags));
}

/// Uniform double in [0, 1). Hand-rolled so that seeded runs are
/// bit-reproducible across standard-library implementations.
inline double uniform_real01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal via Box-Muller (one sample per call, no carried state).
inline double gaussian(Rng& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform integer in [0, bound) by rejection; exact, no modulo bias.
inline std::uint64_t uniform_below_u64(Rng& rng, std::uint64_t bound) {
  const std::uint64_t rem = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t v = rng();
    if (rem != 0 && v > ~std::uint64_t{0} - rem) continue;
    return v % bound;
  }
}

inline uint128 uniform_below_u128(Rng& rng, uint128 bound) {
  if (bound <= uint128(~std::uint64_t{0})) return uniform_below_u64(rng, static_cast<std::uint64_t>(bound));
  const uint128 all_ones = ~uint128{0};
  const uint128 rem = (all_ones % bound + 1) % bound;  // 2^128 mod bound
  for (;;) {
    const uint128 v = (uint128(rng()) << 64) | rng();
    if (rem != 0 && v > all_ones - rem) continue;
    return v % bound;
  }
}

}  // namespace dopewolfe
