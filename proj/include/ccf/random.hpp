#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace ccf {

// std::mt19937_64 has a fully specified output sequence. The std
// distributions do not, so draws go through boost::random, whose
// algorithms are the same on every platform.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed of child stream `index` under `seed`. Streams for different
/// indices are unrelated, so work items can run in any order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return mix64(mix64(seed) ^ mix64(index + 0x632BE59BD9B4E019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  return Rng(derive_seed(seed, stream));
}

/// Uniform integer in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  boost::random::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  boost::random::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng);
}

inline double normal(Rng& rng, double mean, double stddev) {
  boost::random::normal_distribution<double> dist(mean, stddev);
  return dist(rng);
}

}  // namespace ccf
