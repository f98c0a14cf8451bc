#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "hyperpack/types.hpp"

namespace hyperpack {

// splitmix64 finalizer (Steele, Lea, Flood 2014). Used both to derive
// decorrelated sub-seeds from one master seed and to mix structured keys
// (seed, identity, sample) into per-entry seeds. Standard distributions are
// avoided throughout: their output sequences are implementation-defined,
// which would tie recorded seeds to one standard library.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (0x9e3779b97f4a7c15ull + b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b,
                              std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(splitmix64(seed)); }

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, bound) by rejection; unbiased for any bound.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = ~0ull - ~0ull % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// One standard normal draw via Box-Muller; consumes two uniforms.
inline double standard_normal(Rng& rng) {
  const double u = 1.0 - uniform01(rng);  // (0, 1], keeps log finite
  const double r = std::sqrt(-2.0 * std::log(u));
  return r * std::cos(2.0 * M_PI * uniform01(rng));
}

template <typename Derived>
void fill_standard_normal(Eigen::MatrixBase<Derived>& out, Rng& rng) {
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = standard_normal(rng);
}

inline Vec gaussian_vector(Index dim, Rng& rng) {
  Vec v(dim);
  fill_standard_normal(v, rng);
  return v;
}

// In-place Fisher-Yates; std::shuffle is implementation-defined.
template <typename T>
void shuffle_indices(std::vector<T>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace hyperpack
