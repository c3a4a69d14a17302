#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace segsamp::rng {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Order-sensitive combination of a seed with any number of stream indices.
constexpr std::uint64_t derive(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(seed);
  for (std::uint64_t p : parts) {
    h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  }
  return h;
}

constexpr std::uint32_t fmix32(std::uint32_t h) {
  h ^= h >> 16;
  h *= 0x85EBCA6BU;
  h ^= h >> 13;
  h *= 0xC2B2AE35U;
  h ^= h >> 16;
  return h;
}

// Counter-based 32-bit stream keyed on a 64-bit seed: value at counter i is a
// pure function of (seed, i), so draws can be evaluated in any order.
struct CellStream {
  std::uint32_t k0;
  std::uint32_t k1;

  constexpr explicit CellStream(std::uint64_t seed)
      : k0(static_cast<std::uint32_t>(splitmix64(seed))),
        k1(static_cast<std::uint32_t>(splitmix64(seed) >> 32)) {}

  constexpr std::uint32_t operator()(std::uint32_t counter) const {
    std::uint32_t h = fmix32((counter * 0x9E3779B1U) ^ k0);
    return fmix32(h + k1);
  }
};

// Sampling threshold for probability p: draw h is accepted iff h < threshold.
constexpr std::uint64_t bernoulli_threshold(double p) {
  if (!(p > 0.0)) return 0;
  if (p >= 1.0) return 0x100000000ULL;
  return static_cast<std::uint64_t>(p * 4294967296.0);
}

// Uniform in (0,1) from 53 bits of a 64-bit hash.
inline double unit_open(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal pair at counter i of the stream keyed on seed (Box-Muller).
inline void normal_pair(std::uint64_t seed, std::uint64_t counter, double& a, double& b) {
  const double u1 = unit_open(derive(seed, {counter, 0}));
  const double u2 = unit_open(derive(seed, {counter, 1}));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  a = r * std::cos(t);
  b = r * std::sin(t);
}

} // namespace segsamp::rng
