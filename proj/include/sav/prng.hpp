#pragma once

#include <cstdint>

namespace sav {

/// SplitMix64 finalizer. Full-period 64-bit mixer, stateless.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based uniform draw in [-1, 1].
///
/// Stateless: the value depends only on (seed, index), so fields built from it
/// are reproducible bit-for-bit regardless of evaluation order or platform.
/// The 64-bit mix output is mapped through its top 53 bits so the result is an
/// exactly representable double.
inline double rand_uniform(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t z = splitmix64(seed ^ splitmix64(index));
  const double u01 = static_cast<double>(z >> 11) * 0x1.0p-53; // [0, 1)
  return 2.0 * u01 - 1.0;
}

} // namespace sav
