#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace newsgate {

// All randomness flows through explicitly seeded mt19937_64 streams.
// Distributions are hand-rolled on top of the raw 64-bit output so that
// results do not depend on the standard library vendor.
using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a salt
// (splitmix64 finalizer).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform double in [0, 1) with 53 bits of precision.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Uniform integer in [0, n). Modulo bias is irrelevant at the scales used
// here and keeps the mapping portable.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  return n == 0 ? 0 : rng() % n;
}

// Standard normal via Box-Muller; consumes two uniforms per call.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Fisher-Yates shuffle driven by uniform_below, so the permutation is
// reproducible across platforms for a given seed.
template <typename T>
void shuffle(std::vector<T>& values, Rng& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> indices(n);
  for (std::size_t i = 0; i < n; ++i) indices[i] = i;
  shuffle(indices, rng);
  return indices;
}

}  // namespace newsgate
