//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Molecule-editing decision processes. Two variants share one action
// vocabulary: the restricted "decoder" variant grows a molecule
// monotonically (no removal, no promotion, bounded ring sizes, no bonds
// between two ring atoms), while the flexible "search" variant also edits
// existing bonds and is used for brute-force edit distance. States are
// kekulized graphs; every enumerated successor is a valid molecule, so a
// rollout can never leave chemical space.

#ifndef MOLRL_MDP_MDP_HPP_
#define MOLRL_MDP_MDP_HPP_

#include <algorithm>
#include <array>
#include <cassert>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "molrl/chem/aromaticity.hpp"
#include "molrl/chem/canonical.hpp"
#include "molrl/chem/mol_graph.hpp"
#include "molrl/fp/similarity.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

enum class ActionKind : std::uint8_t {
  NoOp = 0,
  AddAtom = 1,
  AddBond = 2,
  RemoveOrDemoteBond = 3,
  PromoteBond = 4,
};

// A graph edit. Which fields are meaningful depends on `kind`; unused index
// fields stay -1 so that equality and ordering are total. `fragment` selects
// the surviving component when removing a bond disconnects the graph
// (0 keeps the side of atom i, 1 the side of atom j, -1 means no split).
struct Action {
  ActionKind kind = ActionKind::NoOp;
  Element element = Element::C;  // add_atom only
  int attach = -1;                // add_atom only; -1 = unattached first atom
  int i = -1;                     // bond endpoints, i < j
  int j = -1;
  int order = 0;                  // integer bond order of the edit
  int fragment = -1;

  static Action no_op() { return Action{}; }
  static Action add_atom(Element e, int attach, int order) {
    Action a;
    a.kind = ActionKind::AddAtom;
    a.element = e;
    a.attach = attach;
    a.order = attach < 0 ? 0 : order;
    return a;
  }
  static Action add_bond(int i, int j, int order) {
    Action a;
    a.kind = ActionKind::AddBond;
    a.i = std::min(i, j);
    a.j = std::max(i, j);
    a.order = order;
    return a;
  }
  static Action remove_or_demote(int i, int j, int fragment = -1) {
    Action a;
    a.kind = ActionKind::RemoveOrDemoteBond;
    a.i = std::min(i, j);
    a.j = std::max(i, j);
    a.fragment = fragment;
    return a;
  }
  static Action promote(int i, int j) {
    Action a;
    a.kind = ActionKind::PromoteBond;
    a.i = std::min(i, j);
    a.j = std::max(i, j);
    return a;
  }

  // Canonical ordering: kind, then indices, then element, order, fragment.
  std::array<int, 7> sort_key() const {
    return {static_cast<int>(kind), i,     j,       attach,
            static_cast<int>(element),     order,   fragment};
  }
  friend bool operator<(const Action& a, const Action& b) { return a.sort_key() < b.sort_key(); }
  friend bool operator==(const Action& a, const Action& b) { return a.sort_key() == b.sort_key(); }

  std::string describe() const {
    switch (kind) {
      case ActionKind::NoOp:
        return "no_op";
      case ActionKind::AddAtom: {
        std::string s = "add_atom ";
        s += element_symbol(element);
        if (attach >= 0) {
          s += " attach=" + std::to_string(attach) + " order=" + std::to_string(order);
        }
        return s;
      }
      case ActionKind::AddBond:
        return "add_bond " + std::to_string(i) + "-" + std::to_string(j) +
               " order=" + std::to_string(order);
      case ActionKind::RemoveOrDemoteBond: {
        std::string s = "remove_or_demote_bond " + std::to_string(i) + "-" + std::to_string(j);
        if (fragment >= 0) s += " keep_fragment=" + std::to_string(fragment);
        return s;
      }
      case ActionKind::PromoteBond:
        return "promote_bond " + std::to_string(i) + "-" + std::to_string(j);
    }
    return "?";
  }
};

enum class MdpVariant : std::uint8_t { Decoder, Search };

struct MdpConfig {
  MdpVariant variant = MdpVariant::Decoder;
  int max_steps = 20;  // episodes run exactly this many steps
  int ring_min = 3;    // new-ring size bounds for add_bond; 0 max = unbounded
  int ring_max = 6;
  bool allow_no_op = true;

  static MdpConfig decoder() { return MdpConfig{}; }
  static MdpConfig search() {
    MdpConfig c;
    c.variant = MdpVariant::Search;
    c.ring_min = 3;
    c.ring_max = 0;
    c.allow_no_op = false;
    return c;
  }
};

// One enumerated action together with its successor state.
struct Candidate {
  Action action;
  MolGraph next;
};

struct Transition {
  MolGraph state;  // state before the action
  Action action;
  MolGraph next;  // state after the action
  double reward = 0.0;
  int t = 0;
  bool terminal = false;
};

struct Episode {
  MolGraph target;  // empty when the rollout was driven by a latent vector only
  std::vector<Transition> steps;
};

namespace detail {

// New atoms enter fully hydrogen-saturated; forming a bond displaces implicit
// hydrogens and breaking one restores them, so h never exceeds the remaining
// valence room.
inline void clamp_h_to_room(MolGraph& g, int atom) {
  Atom& a = g.atom(atom);
  if (a.element == Element::H) return;
  const int room = max_valence(a.element) - g.bond_order_sum(atom);
  a.h_count = std::min(a.h_count, room);
}

inline void restore_h(MolGraph& g, int atom, int delta) {
  Atom& a = g.atom(atom);
  if (a.element == Element::H) return;
  a.h_count += delta;
}

inline MolGraph apply_add_atom(const MolGraph& s, Element e, int attach, int order) {
  MolGraph g = s;
  const int h = e == Element::H ? 0 : max_valence(e) - (attach < 0 ? 0 : order);
  const int v = g.add_atom(e, h);
  if (attach >= 0) {
    g.add_bond(attach, v, static_cast<BondOrder>(order));
    clamp_h_to_room(g, attach);
  }
  return g;
}

inline MolGraph apply_add_bond(const MolGraph& s, int i, int j, int order) {
  MolGraph g = s;
  g.add_bond(i, j, static_cast<BondOrder>(order));
  clamp_h_to_room(g, i);
  clamp_h_to_room(g, j);
  return g;
}

inline MolGraph apply_promote(const MolGraph& s, int bond) {
  MolGraph g = s;
  const Bond& b = g.bond(bond);
  g.set_bond_order(bond, b.order == BondOrder::Single ? BondOrder::Double : BondOrder::Triple);
  clamp_h_to_room(g, b.a);
  clamp_h_to_room(g, b.b);
  return g;
}

// Demotes by one order, or removes a single bond outright. Returns the edited
// graph before any fragment selection.
inline MolGraph apply_demote(const MolGraph& s, int bond, bool* removed) {
  MolGraph g = s;
  const Bond b = g.bond(bond);
  if (b.order == BondOrder::Single) {
    g.remove_bond(bond);
    *removed = true;
  } else {
    g.set_bond_order(bond, b.order == BondOrder::Triple ? BondOrder::Double : BondOrder::Single);
    *removed = false;
  }
  restore_h(g, b.a, 1);
  restore_h(g, b.b, 1);
  return g;
}

// Reason a proposed decoder add_bond is illegal, or empty if legal. `dist` is
// the BFS distance between the endpoints before the bond is added.
inline std::string decoder_add_bond_veto(const MdpConfig& cfg, int order, int dist,
                                         bool i_in_ring, bool j_in_ring) {
  if (order > 2) return "triple bonds between existing atoms are not allowed";
  if (cfg.variant == MdpVariant::Decoder) {
    if (i_in_ring && j_in_ring) return "both endpoints are already ring atoms";
    const int ring_size = dist + 1;
    if (dist >= 0 && (ring_size < cfg.ring_min || (cfg.ring_max > 0 && ring_size > cfg.ring_max))) {
      return "would close a ring of size " + std::to_string(ring_size);
    }
  }
  return {};
}

}  // namespace detail

// All legal actions from `s` with their successors, in canonical action
// order. `s` must be kekulized; aromatic bond orders are not editable.
inline std::vector<Candidate> enumerate_actions(const MolGraph& s, const MdpConfig& cfg) {
  if (s.has_aromatic_bonds()) {
    throw std::invalid_argument("enumerate_actions: state must be kekulized");
  }
  std::vector<Candidate> out;
  if (cfg.allow_no_op) out.push_back({Action::no_op(), s});

  const int n = s.num_atoms();
  std::vector<int> room(n);
  for (int i = 0; i < n; ++i) room[i] = s.free_valence(i);

  // add_atom: a new fully saturated atom and exactly one bond to it.
  if (n == 0) {
    for (int e = 0; e < kNumElements; ++e) {
      out.push_back({Action::add_atom(static_cast<Element>(e), -1, 0),
                     detail::apply_add_atom(s, static_cast<Element>(e), -1, 0)});
    }
  } else {
    for (int a = 0; a < n; ++a) {
      if (room[a] <= 0) continue;
      for (int e = 0; e < kNumElements; ++e) {
        const Element elem = static_cast<Element>(e);
        const int max_order = std::min({3, room[a], max_valence(elem)});
        for (int order = 1; order <= max_order; ++order) {
          out.push_back({Action::add_atom(elem, a, order), detail::apply_add_atom(s, elem, a, order)});
        }
      }
    }
  }

  // add_bond between existing non-adjacent atoms, order 1 or 2.
  const std::vector<bool> in_ring = s.ring_atom_flags();
  for (int i = 0; i < n; ++i) {
    if (room[i] <= 0) continue;
    const std::vector<int> dist = s.bfs_distances(i);
    for (int j = i + 1; j < n; ++j) {
      if (room[j] <= 0 || s.bond_between(i, j) >= 0) continue;
      const int max_order = std::min({2, room[i], room[j]});
      for (int order = 1; order <= max_order; ++order) {
        if (!detail::decoder_add_bond_veto(cfg, order, dist[j], in_ring[i], in_ring[j]).empty()) {
          continue;
        }
        out.push_back({Action::add_bond(i, j, order), detail::apply_add_bond(s, i, j, order)});
      }
    }
  }

  if (cfg.variant == MdpVariant::Search) {
    std::vector<int> bond_ids(s.num_bonds());
    for (int b = 0; b < s.num_bonds(); ++b) bond_ids[b] = b;
    std::sort(bond_ids.begin(), bond_ids.end(), [&](int x, int y) {
      return std::pair(s.bond(x).a, s.bond(x).b) < std::pair(s.bond(y).a, s.bond(y).b);
    });

    for (int b : bond_ids) {
      const Bond bond = s.bond(b);
      bool removed = false;
      MolGraph g = detail::apply_demote(s, b, &removed);
      if (!removed || g.connected()) {
        out.push_back({Action::remove_or_demote(bond.a, bond.b), std::move(g)});
        continue;
      }
      // Removing the bond split the graph; keep one component per action.
      const std::vector<int> comp = g.component_ids();
      for (int side = 0; side <= 1; ++side) {
        const int keep_comp = comp[side == 0 ? bond.a : bond.b];
        std::vector<int> keep;
        for (int v = 0; v < g.num_atoms(); ++v) {
          if (comp[v] == keep_comp) keep.push_back(v);
        }
        out.push_back({Action::remove_or_demote(bond.a, bond.b, side), g.subgraph(keep)});
      }
    }

    for (int b : bond_ids) {
      const Bond bond = s.bond(b);
      if (bond.order == BondOrder::Triple) continue;
      if (room[bond.a] < 1 || room[bond.b] < 1) continue;
      out.push_back({Action::promote(bond.a, bond.b), detail::apply_promote(s, b)});
    }
  }

  assert(std::is_sorted(out.begin(), out.end(),
                        [](const Candidate& a, const Candidate& b) { return a.action < b.action; }));
  return out;
}

// Applies one action by looking it up in the enumeration, so legality has a
// single source of truth. Throws if the action is not legal in `s`.
inline MolGraph apply(const MolGraph& s, const Action& a, const MdpConfig& cfg) {
  for (Candidate& c : enumerate_actions(s, cfg)) {
    if (c.action == a) return std::move(c.next);
  }
  throw std::invalid_argument("illegal action in this state: " + a.describe());
}

// ---------------------------------------------------------------------------
// Idealized episodes: deterministic reconstructions of a target molecule used
// as expert demonstrations. Atoms are placed in stored order (atoms not yet
// bonded to the placed set are deferred), each placement bundles the atom's
// first bond into the add_atom step, and its remaining bonds to placed atoms
// follow as individual add_bond steps.

struct IdealizedResult {
  std::optional<Episode> episode;
  std::string failure;  // set when the target is unreachable under decoder rules

  bool ok() const { return episode.has_value(); }
};

inline IdealizedResult idealized_episode(const MolGraph& y, const MdpConfig& cfg,
                                         const RewardContext* reward_ctx = nullptr) {
  assert(cfg.variant == MdpVariant::Decoder);
  IdealizedResult res;
  if (y.num_atoms() == 0) {
    res.failure = "target is empty";
    return res;
  }
  if (!y.connected()) {
    res.failure = "target is disconnected";
    return res;
  }
  const MolGraph target = kekulize(detail::collapse_explicit_hydrogens(y));
  for (int v = 0; v < target.num_atoms(); ++v) {
    if (target.atom(v).element == Element::H) {
      res.failure = "target contains explicit hydrogen atoms";
      return res;
    }
  }

  // Plan the (action, successor) sequence first; padding happens afterwards.
  std::vector<std::pair<Action, MolGraph>> plan;
  MolGraph state;
  std::vector<int> placed_as(target.num_atoms(), -1);  // target index -> state index
  int n_placed = 0;
  while (n_placed < target.num_atoms()) {
    int pick = -1;
    int via_bond = -1;
    for (int v = 0; v < target.num_atoms() && pick < 0; ++v) {
      if (placed_as[v] >= 0) continue;
      if (n_placed == 0) {
        pick = v;
        break;
      }
      for (int b = 0; b < target.num_bonds(); ++b) {
        const Bond& bond = target.bond(b);
        const int other = bond.a == v ? bond.b : bond.b == v ? bond.a : -1;
        if (other >= 0 && placed_as[other] >= 0) {
          pick = v;
          via_bond = b;
          break;
        }
      }
    }
    assert(pick >= 0);  // connectivity guarantees progress

    const Element elem = target.atom(pick).element;
    if (via_bond < 0) {
      plan.emplace_back(Action::add_atom(elem, -1, 0), detail::apply_add_atom(state, elem, -1, 0));
    } else {
      const Bond& bond = target.bond(via_bond);
      const int attach = placed_as[bond.a == pick ? bond.b : bond.a];
      const int order = bond_int_order(bond.order);
      if (order > max_valence(elem) || order > state.free_valence(attach)) {
        res.failure = "attachment bond exceeds free valence";
        return res;
      }
      plan.emplace_back(Action::add_atom(elem, attach, order),
                        detail::apply_add_atom(state, elem, attach, order));
    }
    state = plan.back().second;
    placed_as[pick] = state.num_atoms() - 1;
    ++n_placed;

    // Remaining bonds from the new atom to already placed atoms, in the
    // target's bond order.
    for (int b = 0; b < target.num_bonds(); ++b) {
      if (b == via_bond) continue;
      const Bond& bond = target.bond(b);
      const int other = bond.a == pick ? bond.b : bond.b == pick ? bond.a : -1;
      if (other < 0 || placed_as[other] < 0) continue;
      const int i = placed_as[pick];
      const int j = placed_as[other];
      const int order = bond_int_order(bond.order);
      const std::vector<bool> in_ring = state.ring_atom_flags();
      const std::string veto = detail::decoder_add_bond_veto(cfg, order, state.bfs_distance(i, j),
                                                             in_ring[i], in_ring[j]);
      if (!veto.empty()) {
        res.failure = veto;
        return res;
      }
      if (order > state.free_valence(i) || order > state.free_valence(j)) {
        res.failure = "ring closure exceeds free valence";
        return res;
      }
      plan.emplace_back(Action::add_bond(i, j, order), detail::apply_add_bond(state, i, j, order));
      state = plan.back().second;
    }
  }

  if (static_cast<int>(plan.size()) > cfg.max_steps) {
    res.failure = "target needs " + std::to_string(plan.size()) + " steps, limit is " +
                  std::to_string(cfg.max_steps);
    return res;
  }

  std::optional<RewardContext> local_ctx;
  if (reward_ctx == nullptr) {
    local_ctx.emplace(y);
    reward_ctx = &*local_ctx;
  }

  Episode ep;
  ep.target = y;
  MolGraph cur;
  for (int t = 0; t < cfg.max_steps; ++t) {
    Transition tr;
    tr.state = cur;
    if (t < static_cast<int>(plan.size())) {
      tr.action = plan[t].first;
      tr.next = plan[t].second;
    } else {
      tr.action = Action::no_op();
      tr.next = cur;
    }
    tr.t = t;
    tr.terminal = t == cfg.max_steps - 1;
    tr.reward = reward_ctx->reward(tr.next);
    cur = tr.next;
    ep.steps.push_back(std::move(tr));
  }
  res.episode = std::move(ep);
  return res;
}

// ---------------------------------------------------------------------------
// Rollouts. The value callback scores candidate successor states; rollouts in
// a batch advance in lockstep so one callback invocation can score every
// pending candidate at once (episode_of maps candidates back to episodes).

using BatchSuccessorValueFn = std::function<std::vector<float>(
    const std::vector<const MolGraph*>& successors, const std::vector<int>& episode_of, int t_next)>;

inline std::vector<Episode> batched_rollout(const std::vector<const MolGraph*>& targets,
                                            const std::vector<const RewardContext*>& rewards,
                                            const BatchSuccessorValueFn& value, double eps,
                                            std::vector<Rng>& rngs, const MdpConfig& cfg) {
  const int batch = static_cast<int>(rngs.size());
  assert(static_cast<int>(targets.size()) == batch && static_cast<int>(rewards.size()) == batch);
  std::vector<Episode> eps_out(batch);
  std::vector<MolGraph> cur(batch);
  for (int b = 0; b < batch; ++b) {
    if (targets[b] != nullptr) eps_out[b].target = *targets[b];
  }

  for (int t = 0; t < cfg.max_steps; ++t) {
    std::vector<std::vector<Candidate>> cands(batch);
    std::vector<int> choice(batch, -1);
    std::vector<const MolGraph*> pending;
    std::vector<int> pending_episode;
    for (int b = 0; b < batch; ++b) {
      cands[b] = enumerate_actions(cur[b], cfg);
      assert(!cands[b].empty());
      if (rngs[b].uniform() < eps) {
        choice[b] = static_cast<int>(rngs[b].below(cands[b].size()));
      } else {
        for (const Candidate& c : cands[b]) {
          pending.push_back(&c.next);
          pending_episode.push_back(b);
        }
      }
    }

    if (!pending.empty()) {
      const std::vector<float> v = value(pending, pending_episode, t + 1);
      assert(v.size() == pending.size());
      std::size_t k = 0;
      for (int b = 0; b < batch; ++b) {
        if (choice[b] >= 0) continue;
        int best = 0;
        float best_v = v[k];
        for (std::size_t c = 1; c < cands[b].size(); ++c) {
          if (v[k + c] > best_v) {
            best_v = v[k + c];
            best = static_cast<int>(c);
          }
        }
        choice[b] = best;
        k += cands[b].size();
      }
    }

    for (int b = 0; b < batch; ++b) {
      Candidate& c = cands[b][choice[b]];
      Transition tr;
      tr.state = std::move(cur[b]);
      tr.action = c.action;
      tr.next = c.next;
      tr.t = t;
      tr.terminal = t == cfg.max_steps - 1;
      tr.reward = rewards[b] != nullptr ? rewards[b]->reward(c.next) : 0.0;
      cur[b] = std::move(c.next);
      eps_out[b].steps.push_back(std::move(tr));
    }
  }
  return eps_out;
}

// Convenience single-episode wrapper.
using SuccessorValueFn =
    std::function<std::vector<float>(const std::vector<const MolGraph*>& successors, int t_next)>;

inline Episode rollout(const MolGraph* target, const RewardContext* reward_ctx,
                       const SuccessorValueFn& value, double eps, Rng& rng, const MdpConfig& cfg) {
  BatchSuccessorValueFn batched;
  if (value) {
    batched = [&value](const std::vector<const MolGraph*>& succ, const std::vector<int>&,
                       int t_next) { return value(succ, t_next); };
  }
  std::vector<Rng> rngs{rng};
  std::vector<Episode> out = batched_rollout({target}, {reward_ctx}, batched, eps, rngs, cfg);
  rng = rngs[0];  // hand the advanced generator state back to the caller
  return std::move(out[0]);
}

}  // namespace molrl

#endif  // MOLRL_MDP_MDP_HPP_
