#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "lasrl/tensor.hpp"

namespace lasrl {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed for a named sub-stream of a master seed ("env", "init", "data", ...).
/// All randomness in the project is derived through here.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return mix64(mix64(master ^ h) + index);
}

inline Rng make_rng(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(master, stream, index));
}

inline Vector gaussian_vector(Rng& rng, std::size_t n, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, sd);
  Vector v(n);
  for (double& x : v) {
    x = dist(rng);
  }
  return v;
}

}  // namespace lasrl
