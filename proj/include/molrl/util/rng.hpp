//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_UTIL_RNG_HPP_
#define MOLRL_UTIL_RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "molrl/util/hash.hpp"

namespace molrl {

// xoshiro256++ with explicit, serializable state. The standard-library
// distributions are implementation-defined, so uniform/normal draws are done
// by hand to keep every run bit-reproducible across toolchains.
class Rng {
 public:
  Rng() : Rng(0) {}

  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) s = (x = splitmix64(x), x);
  }

  // Derives an independent stream; used to give each episode / worker its own
  // generator that does not depend on consumption order elsewhere.
  Rng fork(std::uint64_t stream) const {
    Rng r;
    for (int i = 0; i < 4; ++i)
      r.state_[i] = splitmix64(state_[i] ^ hash_values({stream, static_cast<std::uint64_t>(i)}));
    return r;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection-free modulo bias is negligible for
  // the small n used here, but use Lemire rejection anyway for exactness.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t l = static_cast<std::uint64_t>(m);
    if (l < n) {
      const std::uint64_t t = (0 - n) % n;
      while (l < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        l = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Box-Muller. The second draw of the pair is discarded
  // so the full generator state is exactly the four words below; checkpoints
  // can then capture and restore it without auxiliary flags.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::array<std::uint64_t, 4> state() const { return state_; }
  void set_state(const std::array<std::uint64_t, 4>& s) { state_ = s; }

  // Fisher-Yates shuffle over an index-addressable container.
  template <typename Vec>
  void shuffle(Vec& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace molrl

#endif  // MOLRL_UTIL_RNG_HPP_
