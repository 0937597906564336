//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_UTIL_HASH_HPP_
#define MOLRL_UTIL_HASH_HPP_

#include <cstdint>
#include <initializer_list>

namespace molrl {

// Finalizer of the splitmix64 generator. Used as the mixing primitive for
// every structural hash in the library so fingerprint identifiers are stable
// across platforms and releases.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
  return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

constexpr std::uint64_t hash_values(std::initializer_list<std::uint64_t> vs) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;  // pi fractional bits
  for (std::uint64_t v : vs) h = hash_combine(h, v);
  return h;
}

}  // namespace molrl

#endif  // MOLRL_UTIL_HASH_HPP_
