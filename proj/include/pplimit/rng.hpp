// SPDX-License-Identifier: Apache-2.0
//
// Seeded random streams. Every sampler in the library is a pure function of
// (inputs, seed); per-replication seeds come from a stable hash so that the
// parallel schedule never changes results.

#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "pplimit/core.hpp"

namespace pplimit {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and a path of indices
/// (e.g. grid index, replication index).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = mix64(master);
  for (std::uint64_t p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform double in (0, 1].
inline double uniform01_open_low(Rng& rng) { return 1.0 - uniform01(rng); }

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline std::size_t poisson_count(Rng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ConfigError("poisson_count: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<std::size_t>(dist(rng));
}

/// Uniform point on the unit sphere S^{d-1}.
inline Vec uniform_on_sphere(Rng& rng, int d) {
  Vec u(d);
  double n2 = 0.0;
  do {
    for (int i = 0; i < d; ++i) u[i] = standard_normal(rng);
    n2 = u.squaredNorm();
  } while (n2 == 0.0);
  return u / std::sqrt(n2);
}

/// Uniform point in the d-ball of the given radius centred at the origin.
inline Vec uniform_in_ball(Rng& rng, int d, double radius) {
  Vec u = uniform_on_sphere(rng, d);
  return u * (radius * std::pow(uniform01(rng), 1.0 / d));
}

}  // namespace pplimit
