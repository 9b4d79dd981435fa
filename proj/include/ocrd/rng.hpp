#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ocrd {

/// Generator state owned by the caller. Every sampler takes one by reference;
/// give each thread its own.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent stream for (master seed, stream tag, index).
inline Rng derive_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  const std::uint64_t s = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
  return Rng(s);
}

/// Uniform double in [0, 1) with 53 random bits; identical on every platform,
/// unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF draw from unnormalized nonnegative weights with the given total.
inline std::size_t sample_index(std::span<const double> weights, double total, Rng& rng) {
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  return last_positive;
}

inline std::size_t sample_index(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  return sample_index(weights, total, rng);
}

}  // namespace ocrd
