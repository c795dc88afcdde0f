#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "rrc/types.hpp"

namespace rrc {

// splitmix64, the usual 64-bit finalizing mixer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic stream splitting: a derived seed is the master seed folded
// with each stream id through splitmix64. Keeps repetitions, chains and
// folds independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master ^ splitmix64(stream + 1));
}

inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t seed = master;
  for (std::uint64_t id : path) seed = derive_seed(seed, id);
  return seed;
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

template <class Rng>
Matrixd gaussian_matrix(Index rows, Index cols, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrixd out(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) out(i, k) = normal(rng);
  return out;
}

}  // namespace rrc
