//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_CHEM_AROMATICITY_HPP_
#define MOLRL_CHEM_AROMATICITY_HPP_

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "molrl/chem/mol_graph.hpp"
#include "molrl/chem/ranks.hpp"

namespace molrl {

class KekulizeError : public std::runtime_error {
 public:
  explicit KekulizeError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

// All simple cycles with 3..max_size atoms, deduplicated. Each cycle is
// reported once, as the atom sequence starting from its smallest atom index
// with the smaller of the two neighbor indices second.
inline std::vector<std::vector<int>> simple_cycles(const MolGraph& g, int max_size) {
  std::vector<std::vector<int>> out;
  const int n = g.num_atoms();
  std::vector<bool> on_path(n, false);
  std::vector<int> path;

  // DFS over paths anchored at `start`, all intermediate atoms > start.
  auto dfs = [&](auto&& self, int start, int v) -> void {
    on_path[v] = true;
    path.push_back(v);
    for (const MolGraph::Adj& a : g.neighbors(v)) {
      if (a.nbr == start && path.size() >= 3) {
        if (path[1] < path.back()) out.push_back(path);  // dedup direction
      } else if (a.nbr > start && !on_path[a.nbr] &&
                 static_cast<int>(path.size()) < max_size) {
        self(self, start, a.nbr);
      }
    }
    on_path[v] = false;
    path.pop_back();
  };

  for (int start = 0; start < n; ++start) {
    path.clear();
    dfs(dfs, start, start);
  }
  return out;
}

}  // namespace detail

// Replaces every aromatic bond with an alternating single/double assignment
// that respects each atom's free valence. Hydrogen counts are never touched.
// Deterministic: atoms are processed in refined-rank order, so relabeled
// inputs produce canonically equal outputs.
inline MolGraph kekulize(const MolGraph& g) {
  if (!g.has_aromatic_bonds()) return g;
  MolGraph out = g;

  // Slack: extra integer valence each aromatic atom must receive from
  // promoted (double) bonds. 0 = all its aromatic bonds become single.
  const int n = g.num_atoms();
  std::vector<int> slack(n, 0);
  std::vector<bool> aromatic(n, false);
  for (int v = 0; v < n; ++v) {
    int n_arom = 0, fixed = 0;
    for (const MolGraph::Adj& a : g.neighbors(v)) {
      if (g.bond(a.bond).order == BondOrder::Aromatic)
        ++n_arom;
      else
        fixed += static_cast<int>(g.bond(a.bond).order);
    }
    if (n_arom == 0) continue;
    aromatic[v] = true;
    slack[v] = max_valence(g.atom(v).element) - g.atom(v).h_count - fixed - n_arom;
    if (slack[v] < 0 || slack[v] > 1)
      throw KekulizeError("non-kekulizable aromatic system: atom " + std::to_string(v) +
                          " needs " + std::to_string(slack[v]) + " extra bonds");
  }

  // Perfect matching over slack-1 atoms using aromatic bonds only, explored
  // in refined-rank order for determinism.
  const std::vector<int> rank = refine_ranks(g);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return rank[a] != rank[b] ? rank[a] < rank[b] : a < b;
  });

  std::vector<int> matched_with(n, -1);
  auto next_unmatched = [&](int from_pos) {
    for (int p = from_pos; p < n; ++p) {
      const int v = order[p];
      if (aromatic[v] && slack[v] == 1 && matched_with[v] < 0) return p;
    }
    return n;
  };

  auto solve = [&](auto&& self, int pos) -> bool {
    pos = next_unmatched(pos);
    if (pos == n) return true;
    const int v = order[pos];
    // Try neighbors in rank order.
    std::vector<int> cands;
    for (const MolGraph::Adj& a : g.neighbors(v))
      if (g.bond(a.bond).order == BondOrder::Aromatic && slack[a.nbr] == 1 &&
          matched_with[a.nbr] < 0)
        cands.push_back(a.nbr);
    std::sort(cands.begin(), cands.end(), [&](int a, int b) {
      return rank[a] != rank[b] ? rank[a] < rank[b] : a < b;
    });
    for (int u : cands) {
      matched_with[v] = u;
      matched_with[u] = v;
      if (self(self, pos + 1)) return true;
      matched_with[v] = matched_with[u] = -1;
    }
    return false;
  };

  if (!solve(solve, 0)) throw KekulizeError("non-kekulizable aromatic system: no perfect matching");

  for (int b = 0; b < out.num_bonds(); ++b) {
    if (out.bond(b).order != BondOrder::Aromatic) continue;
    const bool promoted = matched_with[out.bond(b).a] == out.bond(b).b;
    out.set_bond_order(b, promoted ? BondOrder::Double : BondOrder::Single);
  }
  return out;
}

// Marks aromatic every simple 5/6-ring whose kekulized form is
// sp2-consistent and has a pi-electron count of 4n+2. Contributions per ring
// atom: member of an in-ring double bond 1; exocyclic double bond 0;
// saturated N or O lone pair 2; saturated carbon disqualifies the ring.
// Fused systems are handled per simple ring, so shared bonds convert once.
inline MolGraph perceive_aromaticity(const MolGraph& g) {
  if (g.num_bonds() < 3) return g;
  const MolGraph kek = kekulize(g);
  const std::vector<std::vector<int>> cycles = detail::simple_cycles(kek, 6);
  if (cycles.empty()) return kek;

  // Sweep to a fixpoint. Within one sweep every ring is judged against the
  // same snapshot and passers convert together, so the result does not
  // depend on ring enumeration order; later sweeps let a converted shared
  // bond supply the pi pair a fused neighbor ring needs (naphthalene-style).
  MolGraph out = kek;
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> to_convert;
    for (const std::vector<int>& cyc : cycles) {
      const int k = static_cast<int>(cyc.size());
      if (k != 5 && k != 6) continue;
      std::vector<int> bonds(k);
      bool all_aromatic = true;
      for (int i = 0; i < k; ++i) {
        bonds[i] = out.bond_between(cyc[i], cyc[(i + 1) % k]);
        all_aromatic &= out.bond(bonds[i]).order == BondOrder::Aromatic;
      }
      if (all_aromatic) continue;

      int pi = 0;
      bool ok = true;
      for (int i = 0; i < k && ok; ++i) {
        const int v = cyc[i];
        const BondOrder left = out.bond(bonds[(i + k - 1) % k]).order;
        const BondOrder right = out.bond(bonds[i]).order;
        if (left == BondOrder::Triple || right == BondOrder::Triple) {
          ok = false;
          break;
        }
        const bool left_pi = left == BondOrder::Double || left == BondOrder::Aromatic;
        const bool right_pi = right == BondOrder::Double || right == BondOrder::Aromatic;
        if (left_pi && right_pi) {
          // Two adjacent in-ring double bonds make a cumulated sp center,
          // which no alternating assignment can reproduce. A stretch of
          // already-aromatic bonds from a fused neighbor ring is fine.
          if (left == BondOrder::Aromatic && right == BondOrder::Aromatic) {
            pi += 1;
            continue;
          }
          ok = false;
          break;
        }
        if (left_pi || right_pi) {
          pi += 1;  // member of an in-ring pi pair
          continue;
        }
        // No in-ring pi bond: an exocyclic double keeps the atom sp2 but
        // contributes nothing; otherwise only N/O lone pairs qualify.
        bool exo_double = false;
        for (const MolGraph::Adj& a : out.neighbors(v))
          if (out.bond(a.bond).order == BondOrder::Double ||
              out.bond(a.bond).order == BondOrder::Triple)
            exo_double = true;
        if (exo_double) continue;
        const Element e = out.atom(v).element;
        if (e == Element::N || e == Element::O)
          pi += 2;
        else
          ok = false;
      }
      if (!ok || pi % 4 != 2) continue;
      to_convert.insert(to_convert.end(), bonds.begin(), bonds.end());
    }
    for (int b : to_convert) {
      changed |= out.bond(b).order != BondOrder::Aromatic;
      out.set_bond_order(b, BondOrder::Aromatic);
    }
  }
  return out;
}

}  // namespace molrl

#endif  // MOLRL_CHEM_AROMATICITY_HPP_
