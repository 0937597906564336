//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_UTIL_PARALLEL_HPP_
#define MOLRL_UTIL_PARALLEL_HPP_

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace molrl {

// Process-wide worker count. Every parallel loop partitions work statically
// by index, and every unit writes only to its own slots, so results are
// byte-identical for any thread count.
inline int& thread_count() {
  static int n = 1;
  return n;
}

inline void set_thread_count(int n) { thread_count() = std::max(1, n); }

// Runs fn(i) for i in [0, n). Static contiguous partition; fn must not share
// mutable state across indices.
template <typename Fn>
void parallel_for(std::int64_t n, Fn&& fn) {
  const int workers = std::min<std::int64_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::int64_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace molrl

#endif  // MOLRL_UTIL_PARALLEL_HPP_
