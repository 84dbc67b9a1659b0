#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <stdexcept>
#include <vector>

namespace drift {

// Seed mixing and sampling on top of mt19937_64. The standard library's
// distribution objects are implementation-defined, so every draw that can
// reach an output file goes through these helpers instead.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base + splitmix64(salt));
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Unbiased integer in [0, n) by rejection.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: empty range");
  std::uint64_t x = rng();
  std::uint64_t r = x % n;
  while (x - r > 0ull - n) {
    x = rng();
    r = x % n;
  }
  return r;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
  return lo + static_cast<int>(uniform_below(
                  rng, static_cast<std::uint64_t>(hi) - lo + 1));
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_real01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exponential01(std::mt19937_64& rng) {
  return -std::log(1.0 - uniform_real01(rng));
}

// Index drawn proportionally to the gaps of a nondecreasing cdf whose last
// entry is the total mass.
inline std::size_t sample_cdf(std::mt19937_64& rng,
                              const std::vector<double>& cdf) {
  if (cdf.empty()) throw std::invalid_argument("sample_cdf: empty table");
  double u = uniform_real01(rng) * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace drift
