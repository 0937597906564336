//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_CHEM_MOL_GRAPH_HPP_
#define MOLRL_CHEM_MOL_GRAPH_HPP_

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace molrl {

enum class Element : std::uint8_t { H = 0, C = 1, N = 2, O = 3, F = 4 };

inline constexpr int kNumElements = 5;
inline constexpr std::array<Element, kNumElements> kElements = {
    Element::H, Element::C, Element::N, Element::O, Element::F};

constexpr int max_valence(Element e) {
  constexpr std::array<int, kNumElements> v = {1, 4, 3, 2, 1};
  return v[static_cast<int>(e)];
}

constexpr char element_symbol(Element e) {
  constexpr std::array<char, kNumElements> s = {'H', 'C', 'N', 'O', 'F'};
  return s[static_cast<int>(e)];
}

constexpr bool element_from_symbol(char c, Element& out) {
  switch (c) {
    case 'H': out = Element::H; return true;
    case 'C': out = Element::C; return true;
    case 'N': out = Element::N; return true;
    case 'O': out = Element::O; return true;
    case 'F': out = Element::F; return true;
    default: return false;
  }
}

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

// Bond contribution to an atom's valence, in half-units so that the aromatic
// order of 1.5 stays integral: single=2, double=4, triple=6, aromatic=3.
constexpr int bond_half_units(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 2;
    case BondOrder::Double: return 4;
    case BondOrder::Triple: return 6;
    case BondOrder::Aromatic: return 3;
  }
  return 0;
}

constexpr int bond_int_order(BondOrder o) {
  return o == BondOrder::Aromatic ? 1 : static_cast<int>(o);
}

struct Atom {
  Element element = Element::C;
  // Implicit hydrogens attached to this atom. Always materialized: the parser
  // fills organic-subset defaults, graph edits maintain it, and kekulization /
  // aromatic perception never touch it.
  int h_count = 0;
};

struct Bond {
  int a = -1;  // always a < b
  int b = -1;
  BondOrder order = BondOrder::Single;

  int other(int atom) const { return atom == a ? b : a; }
};

// Undirected multigraph-free molecular graph over {H, C, N, O, F} with
// explicit bond orders and per-atom implicit hydrogen counts.
class MolGraph {
 public:
  struct Adj {
    int nbr;
    int bond;
  };

  int add_atom(Element e, int h_count) {
    atoms_.push_back({e, h_count});
    adj_.emplace_back();
    return static_cast<int>(atoms_.size()) - 1;
  }

  int add_bond(int i, int j, BondOrder order) {
    assert(i != j && i >= 0 && j >= 0 && i < num_atoms() && j < num_atoms());
    assert(bond_between(i, j) < 0);
    if (i > j) std::swap(i, j);
    bonds_.push_back({i, j, order});
    const int id = static_cast<int>(bonds_.size()) - 1;
    adj_[i].push_back({j, id});
    adj_[j].push_back({i, id});
    return id;
  }

  void set_bond_order(int bond, BondOrder order) { bonds_[bond].order = order; }

  // O(E) rebuild keeps bond indices contiguous and deterministic.
  void remove_bond(int bond) {
    bonds_.erase(bonds_.begin() + bond);
    rebuild_adjacency();
  }

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const Atom& atom(int i) const { return atoms_[i]; }
  Atom& atom(int i) { return atoms_[i]; }
  const Bond& bond(int i) const { return bonds_[i]; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  const std::vector<Adj>& neighbors(int i) const { return adj_[i]; }

  int degree(int i) const { return static_cast<int>(adj_[i].size()); }

  // Index of the bond between i and j, or -1.
  int bond_between(int i, int j) const {
    for (const Adj& a : adj_[i])
      if (a.nbr == j) return a.bond;
    return -1;
  }

  // Sum of bond orders at atom i in half-units (aromatic counts 3).
  int bond_half_sum(int i) const {
    int s = 0;
    for (const Adj& a : adj_[i]) s += bond_half_units(bonds_[a.bond].order);
    return s;
  }

  // Bond order sum rounded up to whole units; equals the plain integer sum on
  // kekulized graphs.
  int bond_order_sum(int i) const { return (bond_half_sum(i) + 1) / 2; }

  // Remaining capacity for new bonds, ignoring stored hydrogens (adding a
  // bond displaces implicit hydrogens as needed).
  int free_valence(int i) const { return max_valence(atoms_[i].element) - bond_order_sum(i); }

  bool has_aromatic_bond(int i) const {
    for (const Adj& a : adj_[i])
      if (bonds_[a.bond].order == BondOrder::Aromatic) return true;
    return false;
  }

  // Element counts including hydrogens, both explicit atoms and implicit
  // counts. Basis of the atom-count similarity term.
  std::array<int, kNumElements> element_counts() const {
    std::array<int, kNumElements> c{};
    for (const Atom& a : atoms_) {
      ++c[static_cast<int>(a.element)];
      c[static_cast<int>(Element::H)] += a.h_count;
    }
    return c;
  }

  int heavy_atom_count() const {
    int n = 0;
    for (const Atom& a : atoms_) n += a.element != Element::H;
    return n;
  }

  // --- Topology helpers -----------------------------------------------------

  // Per-bond flag: true when the bond lies on a cycle (i.e. is not a bridge).
  // Tarjan lowlink, iterative: a tree edge parent->v is a bridge exactly when
  // low[v] > disc[parent]; every back edge lies on a cycle.
  std::vector<bool> ring_bond_flags() const {
    const int n = num_atoms();
    std::vector<bool> in_ring(bonds_.size(), false);
    std::vector<int> disc(n, -1), low(n, 0);
    int timer = 0;
    std::vector<std::array<int, 3>> stack;  // (vertex, parent bond, adjacency cursor)
    for (int root = 0; root < n; ++root) {
      if (disc[root] >= 0) continue;
      stack.push_back({root, -1, 0});
      disc[root] = low[root] = timer++;
      while (!stack.empty()) {
        auto& [v, pbond, cursor] = stack.back();
        if (cursor < static_cast<int>(adj_[v].size())) {
          const Adj a = adj_[v][cursor++];
          if (a.bond == pbond) continue;
          if (disc[a.nbr] < 0) {
            disc[a.nbr] = low[a.nbr] = timer++;
            stack.push_back({a.nbr, a.bond, 0});
          } else {
            low[v] = std::min(low[v], disc[a.nbr]);
            in_ring[a.bond] = true;
          }
        } else {
          const int child = v;
          const int child_bond = pbond;
          stack.pop_back();
          if (!stack.empty()) {
            const int parent = stack.back()[0];
            low[parent] = std::min(low[parent], low[child]);
            if (low[child] <= disc[parent]) in_ring[child_bond] = true;
          }
        }
      }
    }
    return in_ring;
  }

  std::vector<bool> ring_atom_flags() const {
    const std::vector<bool> rb = ring_bond_flags();
    std::vector<bool> ra(num_atoms(), false);
    for (std::size_t b = 0; b < bonds_.size(); ++b)
      if (rb[b]) ra[bonds_[b].a] = ra[bonds_[b].b] = true;
    return ra;
  }

  // Shortest path length in bonds between i and j, or -1 if disconnected.
  int bfs_distance(int i, int j) const {
    if (i == j) return 0;
    std::vector<int> dist(num_atoms(), -1);
    std::queue<int> q;
    dist[i] = 0;
    q.push(i);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const Adj& a : adj_[v]) {
        if (dist[a.nbr] >= 0) continue;
        dist[a.nbr] = dist[v] + 1;
        if (a.nbr == j) return dist[a.nbr];
        q.push(a.nbr);
      }
    }
    return -1;
  }

  // Distances from one source to all atoms (-1 when unreachable).
  std::vector<int> bfs_distances(int src) const {
    std::vector<int> dist(num_atoms(), -1);
    std::queue<int> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (const Adj& a : adj_[v])
        if (dist[a.nbr] < 0) {
          dist[a.nbr] = dist[v] + 1;
          q.push(a.nbr);
        }
    }
    return dist;
  }

  // Component id per atom, ids assigned in order of lowest member index.
  std::vector<int> component_ids(int* n_components = nullptr) const {
    std::vector<int> comp(num_atoms(), -1);
    int next = 0;
    for (int i = 0; i < num_atoms(); ++i) {
      if (comp[i] >= 0) continue;
      std::queue<int> q;
      comp[i] = next;
      q.push(i);
      while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (const Adj& a : adj_[v])
          if (comp[a.nbr] < 0) {
            comp[a.nbr] = next;
            q.push(a.nbr);
          }
      }
      ++next;
    }
    if (n_components) *n_components = next;
    return comp;
  }

  bool connected() const {
    if (atoms_.empty()) return true;
    int n = 0;
    component_ids(&n);
    return n == 1;
  }

  // Induced subgraph over the given atoms (ascending index order defines the
  // new indices). Bonds between kept atoms are preserved in original order.
  MolGraph subgraph(const std::vector<int>& keep) const {
    std::vector<int> remap(num_atoms(), -1);
    MolGraph out;
    std::vector<int> sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    for (int idx : sorted) remap[idx] = out.add_atom(atoms_[idx].element, atoms_[idx].h_count);
    for (const Bond& b : bonds_)
      if (remap[b.a] >= 0 && remap[b.b] >= 0) out.add_bond(remap[b.a], remap[b.b], b.order);
    return out;
  }

  // --- Validity --------------------------------------------------------------

  // Collects violations of the structural and valence invariants. An empty
  // result means the graph is a representable molecule (possibly
  // disconnected; connectivity is checked by callers that require it).
  std::vector<std::string> validity_errors() const {
    std::vector<std::string> errs;
    for (int i = 0; i < num_atoms(); ++i) {
      const Atom& a = atoms_[i];
      const int mv = max_valence(a.element);
      if (a.h_count < 0) errs.push_back("atom " + std::to_string(i) + ": negative hydrogen count");
      if (a.element == Element::H && a.h_count != 0)
        errs.push_back("atom " + std::to_string(i) + ": hydrogen atom with implicit hydrogens");
      // Valence accounting is kekule-consistent: an aromatic bond occupies
      // one sigma slot and its extra half-order is settled by kekulization
      // (checked where aromatic systems are created), so lone-pair donors
      // like the furan oxygen stay valid.
      int units = 0;
      for (const Adj& ad : adj_[i]) units += bond_int_order(bonds_[ad.bond].order);
      if (units > mv)
        errs.push_back("atom " + std::to_string(i) + ": bond order sum exceeds valence " +
                       std::to_string(mv));
      else if (units + a.h_count > mv)
        errs.push_back("atom " + std::to_string(i) + ": bonds plus hydrogens exceed valence " +
                       std::to_string(mv));
    }
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
      const Bond& bd = bonds_[b];
      if (bd.a == bd.b) errs.push_back("bond " + std::to_string(b) + ": self loop");
      for (std::size_t c = b + 1; c < bonds_.size(); ++c)
        if (bonds_[c].a == bd.a && bonds_[c].b == bd.b)
          errs.push_back("bond " + std::to_string(c) + ": duplicate of bond " + std::to_string(b));
    }
    if (!bonds_.empty()) {
      const std::vector<bool> rb = ring_bond_flags();
      for (std::size_t b = 0; b < bonds_.size(); ++b)
        if (bonds_[b].order == BondOrder::Aromatic && !rb[b])
          errs.push_back("bond " + std::to_string(b) + ": aromatic bond outside any ring");
    }
    return errs;
  }

  bool valid() const { return validity_errors().empty(); }

  bool has_aromatic_bonds() const {
    for (const Bond& b : bonds_)
      if (b.order == BondOrder::Aromatic) return true;
    return false;
  }

 private:
  void rebuild_adjacency() {
    for (auto& v : adj_) v.clear();
    for (int b = 0; b < num_bonds(); ++b) {
      adj_[bonds_[b].a].push_back({bonds_[b].b, b});
      adj_[bonds_[b].b].push_back({bonds_[b].a, b});
    }
  }

  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Adj>> adj_;
};

}  // namespace molrl

#endif  // MOLRL_CHEM_MOL_GRAPH_HPP_
