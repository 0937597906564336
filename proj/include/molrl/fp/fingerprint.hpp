//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_FP_FINGERPRINT_HPP_
#define MOLRL_FP_FINGERPRINT_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <vector>

#include "molrl/chem/aromaticity.hpp"
#include "molrl/chem/mol_graph.hpp"
#include "molrl/util/hash.hpp"

namespace molrl {

// Counted multiset of 64-bit structural feature identifiers. Sparse and
// unhashed-to-fixed-width: distinct environments keep distinct keys.
class SparseFingerprint {
 public:
  void add(std::uint64_t id, std::uint32_t count = 1) { counts_[id] += count; }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (const auto& [id, c] : counts_) t += c;
    return t;
  }

  bool empty() const { return counts_.empty(); }
  const std::map<std::uint64_t, std::uint32_t>& counts() const { return counts_; }

  // Multiset intersection size: per-key minimum of counts.
  friend std::uint64_t intersection_size(const SparseFingerprint& a, const SparseFingerprint& b) {
    std::uint64_t t = 0;
    auto ia = a.counts_.begin();
    auto ib = b.counts_.begin();
    while (ia != a.counts_.end() && ib != b.counts_.end()) {
      if (ia->first < ib->first)
        ++ia;
      else if (ib->first < ia->first)
        ++ib;
      else {
        t += std::min(ia->second, ib->second);
        ++ia;
        ++ib;
      }
    }
    return t;
  }

 private:
  std::map<std::uint64_t, std::uint32_t> counts_;
};

namespace detail {

// Heavy-atom view: explicit hydrogen nodes fold into their neighbor's
// hydrogen count and are excluded from all three structural fingerprints.
struct HeavyView {
  std::vector<int> atoms;            // heavy atom indices in g
  std::vector<int> index_of;         // g atom index -> dense heavy index, -1 for H
  std::vector<int> eff_h;            // implicit + explicit-H-neighbor count, per dense index
  std::vector<std::vector<int>> adj; // dense neighbor lists
  std::vector<std::vector<int>> adj_bond;  // parallel bond ids (into g)

  explicit HeavyView(const MolGraph& g) {
    index_of.assign(g.num_atoms(), -1);
    for (int v = 0; v < g.num_atoms(); ++v)
      if (g.atom(v).element != Element::H) {
        index_of[v] = static_cast<int>(atoms.size());
        atoms.push_back(v);
      }
    const int n = static_cast<int>(atoms.size());
    eff_h.resize(n);
    adj.resize(n);
    adj_bond.resize(n);
    for (int i = 0; i < n; ++i) {
      const int v = atoms[i];
      eff_h[i] = g.atom(v).h_count;
      for (const MolGraph::Adj& a : g.neighbors(v)) {
        if (g.atom(a.nbr).element == Element::H) {
          ++eff_h[i];
          continue;
        }
        adj[i].push_back(index_of[a.nbr]);
        adj_bond[i].push_back(a.bond);
      }
    }
  }
};

inline std::uint64_t bond_code(BondOrder o) { return static_cast<std::uint64_t>(o); }

inline std::uint64_t element_code(Element e) { return static_cast<std::uint64_t>(e); }

}  // namespace detail

// Circular environments of radius 0..r around each heavy atom, iteratively
// hashed from (previous id, sorted (bond, previous neighbor id) list).
// Duplicate environments are removed by their bond set as in standard ECFP:
// radius-0 identifiers always count; larger environments count once, the
// smallest identifier winning among same-set candidates of one iteration.
// The graph is aromatized first so kekule intermediates match aromatic
// targets.
inline SparseFingerprint morgan_fingerprint(const MolGraph& mol, int r) {
  const MolGraph g = perceive_aromaticity(mol);
  const detail::HeavyView hv(g);
  const int n = static_cast<int>(hv.atoms.size());
  SparseFingerprint fp;
  if (n == 0) return fp;

  const std::vector<bool> ring_atom = g.ring_atom_flags();
  std::vector<std::uint64_t> id(n);
  std::vector<std::vector<int>> env(n);  // sorted bond-id sets
  for (int i = 0; i < n; ++i) {
    const int v = hv.atoms[i];
    id[i] = hash_values({0xECF9ULL, detail::element_code(g.atom(v).element),
                         static_cast<std::uint64_t>(hv.adj[i].size()),
                         static_cast<std::uint64_t>(hv.eff_h[i]),
                         ring_atom[v] ? 1ULL : 0ULL});
    fp.add(id[i]);
  }

  std::map<std::vector<int>, std::uint64_t> seen;
  for (int radius = 1; radius <= r; ++radius) {
    std::vector<std::uint64_t> next_id(n);
    std::vector<std::vector<int>> next_env(n);
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> nbrs;
      std::vector<int> e = env[i];
      for (std::size_t k = 0; k < hv.adj[i].size(); ++k) {
        const int j = hv.adj[i][k];
        const int b = hv.adj_bond[i][k];
        nbrs.emplace_back(detail::bond_code(g.bond(b).order), id[j]);
        e.push_back(b);
        e.insert(e.end(), env[j].begin(), env[j].end());
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::sort(e.begin(), e.end());
      e.erase(std::unique(e.begin(), e.end()), e.end());
      std::uint64_t h = hash_combine(0x4D4F5247ULL, id[i]);
      for (const auto& [bc, nid] : nbrs) h = hash_combine(hash_combine(h, bc), nid);
      next_id[i] = h;
      next_env[i] = std::move(e);
    }
    // Group this iteration's environments by bond set; the smallest id per
    // new set is recorded once.
    std::map<std::vector<int>, std::uint64_t> batch;
    for (int i = 0; i < n; ++i) {
      if (next_env[i].empty() || seen.count(next_env[i])) continue;
      auto [it, inserted] = batch.emplace(next_env[i], next_id[i]);
      if (!inserted) it->second = std::min(it->second, next_id[i]);
    }
    for (const auto& [e, h] : batch) {
      fp.add(h);
      seen.emplace(e, h);
    }
    id = std::move(next_id);
    env = std::move(next_env);
  }
  return fp;
}

// Linear simple paths of 0..max_len bonds over heavy atoms, identified by
// the lexicographically smaller direction of their (element, bond, element,
// ...) label sequence. Each undirected path instance counts once.
inline SparseFingerprint path_fingerprint(const MolGraph& mol, int max_len) {
  const MolGraph g = perceive_aromaticity(mol);
  const detail::HeavyView hv(g);
  const int n = static_cast<int>(hv.atoms.size());
  SparseFingerprint fp;

  std::vector<std::uint64_t> atom_label(n);
  for (int i = 0; i < n; ++i) {
    atom_label[i] = detail::element_code(g.atom(hv.atoms[i]).element);
    fp.add(hash_values({0x50415448ULL, atom_label[i]}));
  }

  std::vector<std::uint64_t> labels;  // element, bond, element, ...
  std::vector<bool> on_path(n, false);
  std::vector<int> path;

  auto path_id = [&]() {
    const std::size_t m = labels.size();
    bool reversed = false;
    for (std::size_t k = 0; k < m; ++k) {
      const std::uint64_t fwd = labels[k];
      const std::uint64_t bwd = labels[m - 1 - k];
      if (fwd != bwd) {
        reversed = bwd < fwd;
        break;
      }
    }
    std::uint64_t h = 0x50415448ULL;
    if (!reversed)
      for (std::size_t k = 0; k < m; ++k) h = hash_combine(h, labels[k]);
    else
      for (std::size_t k = m; k-- > 0;) h = hash_combine(h, labels[k]);
    return h;
  };

  auto dfs = [&](auto&& self, int v) -> void {
    on_path[v] = true;
    path.push_back(v);
    if (path.size() >= 2 && path.front() < path.back()) fp.add(path_id());
    if (static_cast<int>(path.size()) <= max_len) {
      for (std::size_t k = 0; k < hv.adj[v].size(); ++k) {
        const int u = hv.adj[v][k];
        if (on_path[u]) continue;
        labels.push_back(detail::bond_code(g.bond(hv.adj_bond[v][k]).order));
        labels.push_back(atom_label[u]);
        self(self, u);
        labels.pop_back();
        labels.pop_back();
      }
    }
    on_path[v] = false;
    path.pop_back();
  };

  for (int s = 0; s < n; ++s) {
    labels.assign(1, atom_label[s]);
    dfs(dfs, s);
  }
  return fp;
}

// One identifier per unordered heavy-atom pair: both typecodes plus the
// topological distance between them. Typecode = (element, heavy degree,
// pi-bond count), with aromatic bonds contributing one pi each.
inline SparseFingerprint atom_pair_fingerprint(const MolGraph& mol) {
  const MolGraph g = perceive_aromaticity(mol);
  const detail::HeavyView hv(g);
  const int n = static_cast<int>(hv.atoms.size());
  SparseFingerprint fp;
  if (n == 0) return fp;

  std::vector<std::uint64_t> type(n);
  for (int i = 0; i < n; ++i) {
    int pi = 0;
    for (int b : hv.adj_bond[i]) {
      switch (g.bond(b).order) {
        case BondOrder::Double: pi += 1; break;
        case BondOrder::Triple: pi += 2; break;
        case BondOrder::Aromatic: pi += 1; break;
        case BondOrder::Single: break;
      }
    }
    type[i] = hash_values({0x50414952ULL, detail::element_code(g.atom(hv.atoms[i]).element),
                           static_cast<std::uint64_t>(hv.adj[i].size()),
                           static_cast<std::uint64_t>(pi)});
  }

  for (int s = 0; s < n; ++s) {
    // BFS over the heavy subgraph.
    std::vector<int> dist(n, -1);
    std::queue<int> q;
    dist[s] = 0;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int u : hv.adj[v])
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push(u);
        }
    }
    for (int t = s + 1; t < n; ++t) {
      if (dist[t] <= 0) continue;
      fp.add(hash_values({0x44495354ULL, std::min(type[s], type[t]), std::max(type[s], type[t]),
                          static_cast<std::uint64_t>(dist[t])}));
    }
  }
  return fp;
}

}  // namespace molrl

#endif  // MOLRL_FP_FINGERPRINT_HPP_
