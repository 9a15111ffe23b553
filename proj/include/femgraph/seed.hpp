#pragma once

#include <cstdint>

namespace femgraph {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// sample_seed = h(h(h(h(seed) ^ family) ^ index) ^ attempt), h = splitmix64.
// Attempt 0 is the first try; retries after a pipeline failure use 1, 2, ...
inline std::uint64_t sample_seed(std::uint64_t seed, int family, int index, int attempt = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(family));
  h = splitmix64(h ^ static_cast<std::uint64_t>(index));
  return splitmix64(h ^ static_cast<std::uint64_t>(attempt));
}

}  // namespace femgraph
