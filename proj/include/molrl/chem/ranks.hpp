//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_CHEM_RANKS_HPP_
#define MOLRL_CHEM_RANKS_HPP_

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "molrl/chem/mol_graph.hpp"

namespace molrl {

// Iterative neighborhood refinement. Atoms start from the invariant
// (element, degree, hydrogen count, in-ring flag) and are repeatedly
// re-partitioned by (own rank, sorted multiset of (bond order, neighbor
// rank)) until the partition stabilizes. Ranks are dense, 0-based, and
// independent of atom labeling up to graph automorphism: two atoms share a
// rank only if no invariant in this family separates them.
//
// `fixed` optionally individualizes atoms: fixed[v] >= 0 is prepended to
// v's initial invariant (used by the canonical writer to break ties).
inline std::vector<int> refine_ranks(const MolGraph& g,
                                     const std::vector<int>* fixed = nullptr) {
  const int n = g.num_atoms();
  std::vector<int> rank(n, 0);
  if (n == 0) return rank;

  const std::vector<bool> ring_atom = g.ring_atom_flags();
  std::vector<std::vector<std::int64_t>> key(n);
  for (int v = 0; v < n; ++v) {
    key[v] = {fixed ? static_cast<std::int64_t>((*fixed)[v]) : -1,
              static_cast<std::int64_t>(g.atom(v).element),
              g.degree(v),
              g.atom(v).h_count,
              ring_atom[v] ? 1 : 0};
  }

  std::vector<int> order(n);
  auto assign_ranks = [&]() -> int {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return key[a] < key[b]; });
    int classes = 0;
    for (int i = 0; i < n; ++i) {
      if (i > 0 && key[order[i]] != key[order[i - 1]]) ++classes;
      rank[order[i]] = classes;
    }
    return classes + 1;
  };

  int n_classes = assign_ranks();
  while (n_classes < n) {
    for (int v = 0; v < n; ++v) {
      std::vector<std::int64_t> nbr;
      nbr.reserve(g.degree(v));
      for (const MolGraph::Adj& a : g.neighbors(v))
        nbr.push_back(static_cast<std::int64_t>(g.bond(a.bond).order) * (n + 1) +
                      rank[a.nbr]);
      std::sort(nbr.begin(), nbr.end());
      key[v].assign(1, rank[v]);
      key[v].insert(key[v].end(), nbr.begin(), nbr.end());
    }
    const int next = assign_ranks();
    if (next == n_classes) break;
    n_classes = next;
  }
  return rank;
}

// Atom visit order sorted by (refined rank, index). Used wherever a
// label-stable but cheap ordering is needed (e.g. packing graphs for the
// encoder); atoms tied here are automorphic under the refinement family.
inline std::vector<int> refined_order(const MolGraph& g) {
  const std::vector<int> rank = refine_ranks(g);
  std::vector<int> order(g.num_atoms());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return rank[a] != rank[b] ? rank[a] < rank[b] : a < b;
  });
  return order;
}

}  // namespace molrl

#endif  // MOLRL_CHEM_RANKS_HPP_
