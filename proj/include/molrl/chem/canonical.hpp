//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_CHEM_CANONICAL_HPP_
#define MOLRL_CHEM_CANONICAL_HPP_

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "molrl/chem/aromaticity.hpp"
#include "molrl/chem/mol_graph.hpp"
#include "molrl/chem/ranks.hpp"

namespace molrl {

namespace detail {

// Explicit hydrogen atoms bonded to one heavy atom fold into that atom's
// implicit count, so graphs built atom-by-atom compare equal to parsed ones.
// Lone hydrogens and H-H stay explicit ([H], [H][H]).
inline MolGraph collapse_explicit_hydrogens(const MolGraph& g) {
  std::vector<int> keep;
  std::vector<int> extra_h(g.num_atoms(), 0);
  for (int v = 0; v < g.num_atoms(); ++v) {
    const Atom& a = g.atom(v);
    if (a.element == Element::H && g.degree(v) == 1) {
      const MolGraph::Adj adj = g.neighbors(v)[0];
      if (g.atom(adj.nbr).element != Element::H &&
          g.bond(adj.bond).order == BondOrder::Single) {
        ++extra_h[adj.nbr];
        continue;
      }
    }
    keep.push_back(v);
  }
  if (static_cast<int>(keep.size()) == g.num_atoms()) return g;
  MolGraph out = g.subgraph(keep);
  for (std::size_t i = 0; i < keep.size(); ++i)
    out.atom(static_cast<int>(i)).h_count += extra_h[keep[i]];
  return out;
}

// Hydrogen count the parser would infer for a bare (bracket-free) symbol.
inline int implied_h(const MolGraph& g, int v) {
  return std::max(0, max_valence(g.atom(v).element) - g.bond_order_sum(v));
}

struct EmitPlan {
  std::vector<int> preorder;                 // atoms in emission order
  std::vector<int> parent_bond;              // bond to parent, -1 for root
  std::vector<std::vector<int>> children;    // child atoms in visit order
  std::vector<std::vector<int>> ring_bonds;  // ring-closure bond ids per atom
};

// Depth-first spanning tree from `root`, neighbors in ascending `rank`
// order. Back edges become ring closures recorded at both endpoints.
inline EmitPlan plan_traversal(const MolGraph& g, const std::vector<int>& rank, int root) {
  const int n = g.num_atoms();
  EmitPlan plan;
  plan.parent_bond.assign(n, -1);
  plan.children.assign(n, {});
  plan.ring_bonds.assign(n, {});
  std::vector<int> pos(n, -1);  // preorder position
  std::vector<bool> bond_used(g.num_bonds(), false);

  auto dfs = [&](auto&& self, int v) -> void {
    pos[v] = static_cast<int>(plan.preorder.size());
    plan.preorder.push_back(v);
    std::vector<MolGraph::Adj> adj(g.neighbors(v).begin(), g.neighbors(v).end());
    std::sort(adj.begin(), adj.end(), [&](const MolGraph::Adj& a, const MolGraph::Adj& b) {
      return rank[a.nbr] != rank[b.nbr] ? rank[a.nbr] < rank[b.nbr] : a.nbr < b.nbr;
    });
    for (const MolGraph::Adj& a : adj) {
      if (bond_used[a.bond]) continue;
      if (pos[a.nbr] >= 0) {
        // Back edge: a ring closure opened at the earlier atom.
        bond_used[a.bond] = true;
        plan.ring_bonds[a.nbr].push_back(a.bond);
        plan.ring_bonds[v].push_back(a.bond);
        continue;
      }
      bond_used[a.bond] = true;
      plan.children[v].push_back(a.nbr);
      plan.parent_bond[a.nbr] = a.bond;
      self(self, a.nbr);
    }
  };
  dfs(dfs, root);
  return plan;
}

inline std::string emit_smiles(const MolGraph& g, const std::vector<int>& rank) {
  if (g.num_atoms() == 0) return "";
  int root = 0;
  for (int v = 1; v < g.num_atoms(); ++v)
    if (rank[v] < rank[root]) root = v;
  EmitPlan plan = plan_traversal(g, rank, root);

  const int n = g.num_atoms();
  std::vector<int> pos(n, 0);
  for (int i = 0; i < static_cast<int>(plan.preorder.size()); ++i) pos[plan.preorder[i]] = i;

  std::vector<bool> written_aromatic(n, false);
  for (int v = 0; v < n; ++v) written_aromatic[v] = g.has_aromatic_bond(v);

  // Ring closures at each atom ordered by the partner's emission position;
  // digits assigned in emission order, smallest free digit first, released
  // when the closing side is written.
  for (int v = 0; v < n; ++v) {
    std::sort(plan.ring_bonds[v].begin(), plan.ring_bonds[v].end(), [&](int ba, int bb) {
      const int pa = pos[g.bond(ba).other(v)];
      const int pb = pos[g.bond(bb).other(v)];
      return pa != pb ? pa < pb : ba < bb;
    });
  }
  std::vector<int> digit_of(g.num_bonds(), -1);
  {
    std::vector<bool> digit_used(100, false);
    std::vector<bool> opened(g.num_bonds(), false);
    for (int v : plan.preorder) {
      for (int b : plan.ring_bonds[v]) {
        if (!opened[b]) {
          opened[b] = true;
          for (int d = 1; d < 100; ++d)
            if (!digit_used[d]) {
              digit_used[d] = true;
              digit_of[b] = d;
              break;
            }
        } else {
          digit_used[digit_of[b]] = false;  // closing side frees the digit
        }
      }
    }
  }

  auto bond_symbol = [&](int b) -> std::string {
    const Bond& bd = g.bond(b);
    switch (bd.order) {
      case BondOrder::Double: return "=";
      case BondOrder::Triple: return "#";
      case BondOrder::Aromatic: return "";
      case BondOrder::Single:
        return written_aromatic[bd.a] && written_aromatic[bd.b] ? "-" : "";
    }
    return "";
  };

  auto atom_token = [&](int v) -> std::string {
    const Atom& a = g.atom(v);
    char sym = element_symbol(a.element);
    if (written_aromatic[v]) sym = static_cast<char>(std::tolower(sym));
    if (a.element != Element::H && a.h_count == implied_h(g, v)) return std::string(1, sym);
    std::string t = "[";
    t.push_back(sym);
    if (a.h_count == 1)
      t += "H";
    else if (a.h_count > 1)
      t += "H" + std::to_string(a.h_count);
    t += "]";
    return t;
  };

  auto digit_token = [&](int d) -> std::string {
    return d < 10 ? std::to_string(d) : "%" + std::to_string(d);
  };

  std::vector<bool> ring_opened(g.num_bonds(), false);
  auto emit = [&](auto&& self, int v) -> std::string {
    std::string s = atom_token(v);
    for (int b : plan.ring_bonds[v]) {
      if (!ring_opened[b]) {
        ring_opened[b] = true;
        s += bond_symbol(b);  // symbol on the opening side only
      }
      s += digit_token(digit_of[b]);
    }
    const auto& kids = plan.children[v];
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const std::string sub = bond_symbol(plan.parent_bond[kids[i]]) + self(self, kids[i]);
      if (i + 1 < kids.size())
        s += "(" + sub + ")";
      else
        s += sub;
    }
    return s;
  };
  return emit(emit, root);
}

// Minimal string over all tie-breaking choices. Refinement may stall with
// tied (automorphic or near-automorphic) atoms; individualizing one member
// of the first tied class and recursing guarantees a label-independent
// result even when ties are not true automorphisms.
inline std::string min_string_over_ties(const MolGraph& g, std::vector<int> fixed, int depth) {
  std::vector<int> rank = refine_ranks(g, &fixed);
  const int n = g.num_atoms();
  std::vector<int> class_size(n, 0);
  for (int v = 0; v < n; ++v) ++class_size[rank[v]];
  int tied_rank = -1;
  for (int r = 0; r < n; ++r)
    if (class_size[r] > 1) {
      tied_rank = r;
      break;
    }
  if (tied_rank < 0) return emit_smiles(g, rank);

  std::string best;
  bool first = true;
  for (int v = 0; v < n; ++v) {
    if (rank[v] != tied_rank) continue;
    std::vector<int> fixed2 = fixed;
    fixed2[v] = depth;  // unique small invariant separates v from its class
    std::string s = min_string_over_ties(g, std::move(fixed2), depth + 1);
    if (first || s < best) {
      best = std::move(s);
      first = false;
    }
  }
  return best;
}

}  // namespace detail

// Canonical SMILES: aromaticity is perceived, explicit hydrogens are folded
// into their heavy neighbors, atoms are ranked by iterative refinement with
// exhaustive tie-breaking, and the lexicographically smallest emission is
// returned. Invariant under atom relabeling.
inline std::string write_canonical_smiles(const MolGraph& g) {
  if (g.num_atoms() == 0) return "";
  const MolGraph gw = detail::collapse_explicit_hydrogens(perceive_aromaticity(g));
  std::vector<int> fixed(gw.num_atoms(), std::numeric_limits<int>::max());
  return detail::min_string_over_ties(gw, std::move(fixed), 0);
}

inline bool canonical_equal(const MolGraph& a, const MolGraph& b) {
  return write_canonical_smiles(a) == write_canonical_smiles(b);
}

}  // namespace molrl

#endif  // MOLRL_CHEM_CANONICAL_HPP_
