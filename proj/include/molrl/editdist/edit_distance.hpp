//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Brute-force edit distance between molecules: the minimum number of
// search-variant actions that transform A into B. Breadth-first expansion
// with canonical-SMILES deduplication, so the frontier grows layer by layer
// and the first hit is optimal. The state space is exponential in the step
// limit; both a step limit and a visited-set cap bound the search, and
// hitting either one is reported explicitly instead of being truncated away.

#ifndef MOLRL_EDITDIST_EDIT_DISTANCE_HPP_
#define MOLRL_EDITDIST_EDIT_DISTANCE_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "molrl/chem/aromaticity.hpp"
#include "molrl/chem/canonical.hpp"
#include "molrl/chem/mol_graph.hpp"
#include "molrl/mdp/mdp.hpp"

namespace molrl {

struct SearchResult {
  std::optional<int> distance;    // absent exactly when hit_limit is set
  std::size_t expanded_states = 0;  // states whose successors were generated
  bool hit_limit = false;
};

inline SearchResult mdp_edit_distance(const MolGraph& a, const MolGraph& b, int max_steps,
                                      std::size_t max_states = 2'000'000) {
  SearchResult res;
  const std::string goal = write_canonical_smiles(b);
  MolGraph start = kekulize(a);
  if (write_canonical_smiles(start) == goal) {
    res.distance = 0;
    return res;
  }

  const MdpConfig cfg = MdpConfig::search();
  std::unordered_set<std::string> visited;
  visited.insert(write_canonical_smiles(start));
  std::vector<MolGraph> frontier;
  frontier.push_back(std::move(start));

  for (int depth = 1; depth <= max_steps && !frontier.empty(); ++depth) {
    std::vector<MolGraph> next;
    for (const MolGraph& s : frontier) {
      ++res.expanded_states;
      for (Candidate& c : enumerate_actions(s, cfg)) {
        std::string key = write_canonical_smiles(c.next);
        if (key == goal) {
          res.distance = depth;
          return res;
        }
        if (visited.size() >= max_states) {
          res.hit_limit = true;
          return res;
        }
        if (visited.insert(std::move(key)).second) {
          next.push_back(std::move(c.next));
        }
      }
    }
    frontier = std::move(next);
  }

  res.hit_limit = true;
  return res;
}

}  // namespace molrl

#endif  // MOLRL_EDITDIST_EDIT_DISTANCE_HPP_
