#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace spa {

using Rng = std::mt19937_64;

enum class Stream : std::uint64_t { Agent = 0, Environment = 1 };

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed of one (episode, stream) pair. Depends only on the key, so episodes
// can run in any order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t episode, Stream stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ episode) ^ static_cast<std::uint64_t>(stream));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t episode, Stream stream) {
  return Rng(derive_seed(master, episode, stream));
}

// 53-bit uniform in [0, 1).
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inverse-CDF draw from p. Falls back to the last positive entry when
// rounding leaves u above the cumulative sum.
inline std::size_t sample_index(std::span<const double> p, double u) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    acc += p[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace spa
