#pragma once

#include <cstdint>
#include <random>

namespace glns {

/// Mersenne twister; every run owns one, seeded from its run seed.
using Rng = std::mt19937;

/// Uniform double in [0, 1), never 1.0.
inline double uniform01(Rng& rng) { return static_cast<double>(rng()) * 0x1p-32; }

/// Uniform integer in [lo, hi] by rejection; identical streams on every platform.
inline int uniform_int(Rng& rng, int lo, int hi) {
  const std::uint32_t span = static_cast<std::uint32_t>(hi) - static_cast<std::uint32_t>(lo) + 1u;
  if (span == 0) return static_cast<int>(rng());
  const std::uint32_t limit = UINT32_MAX - UINT32_MAX % span;
  std::uint32_t x = rng();
  while (x >= limit) x = rng();
  return lo + static_cast<int>(x % span);
}

}  // namespace glns
