#pragma once

// Deterministic random draws. std::mt19937_64 has a standard-specified output
// sequence; the distribution mappings below are fixed here so that fixtures
// reproduce bit-identically across platforms and reimplementations
// (std::uniform_*_distribution is implementation-defined and must not be used).

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace linkrt {

using Rng = std::mt19937_64;

/// Uniform integer in [0, n) by rejection sampling on raw 64-bit draws.
inline std::uint64_t uniform_u64(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_u64: n must be positive");
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform_in(Rng& rng, double lo, double hi) {
  return lo + uniform_unit(rng) * (hi - lo);
}

/// k distinct indices from [0, n), returned in ascending order.
/// Partial Fisher-Yates over an index array, then sort of the chosen block.
inline std::vector<std::size_t> sample_indices(Rng& rng, std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("sample_indices: k exceeds n");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + std::size_t(uniform_u64(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace linkrt
