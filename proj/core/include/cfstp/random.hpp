#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace cfstp {

// splitmix64 finalizer; used to derive independent stream seeds from a base
// seed and a tuple of integers.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value + 0x632BE59BD9B4E019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = mix64(seed);
  for (auto p : parts) h = combine_seed(h, p);
  return h;
}

using Rng = std::mt19937_64;

}  // namespace cfstp
