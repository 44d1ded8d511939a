#pragma once

#include <cstddef>
#include <random>

namespace optflow {

/// Uniform draw in [0, 1) from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Uniform index in [0, n); n > 0.
inline std::size_t uniform_index(std::size_t n, std::mt19937_64& rng) {
  const auto i = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
  return i < n ? i : n - 1;
}

/// Standard normal via Box-Muller on uniform01.
double standard_normal(std::mt19937_64& rng);

}  // namespace optflow
