//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Experience replay. Each 20-step episode becomes 20 buffer entries, one per
// visited state: the entry keeps the state itself, the reward of that state
// against the episode's target, how many steps preceded the state, and the
// frozen per-episode latent noise so the loss can rebuild the episode's
// target sample from fresh encoder outputs. Eviction is strictly oldest
// first; sampling is uniform over current contents.

#ifndef MOLRL_TRAIN_REPLAY_HPP_
#define MOLRL_TRAIN_REPLAY_HPP_

#include <cstddef>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

#include "molrl/fp/similarity.hpp"
#include "molrl/mdp/mdp.hpp"
#include "molrl/nn/tensor.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

struct ReplayEntry {
  MolGraph state;
  Action action;        // action taken from this state (diagnostic record)
  double reward = 0.0;  // R(state, target)
  int t = 0;            // steps taken before this state
  bool terminal = false;
  int target_id = -1;  // index into the trainer's target table
  Tensor eta;          // [1, kLatentDim] noise frozen for the whole episode
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity, std::size_t warmup)
      : capacity_(capacity), warmup_(warmup) {}

  void push(ReplayEntry e) {
    if (entries_.size() == capacity_) entries_.pop_front();
    entries_.push_back(std::move(e));
  }

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool warmed_up() const { return entries_.size() >= warmup_; }

  const ReplayEntry& operator[](std::size_t i) const { return entries_[i]; }

  // Uniform over current contents.
  const ReplayEntry& sample(Rng& rng) const {
    if (entries_.empty()) throw std::logic_error("replay buffer: sampling while empty");
    return entries_[static_cast<std::size_t>(rng.below(entries_.size()))];
  }

 private:
  std::size_t capacity_;
  std::size_t warmup_;
  std::deque<ReplayEntry> entries_;
};

// Flattens one episode into its per-state entries. The episode's Transition
// rewards score the state *after* each action, while a buffer entry carries
// the reward of its own state, so entry k takes the reward recorded on step
// k-1; the initial empty state scores zero by construction.
inline std::vector<ReplayEntry> episode_entries(const Episode& ep, const RewardContext& ctx,
                                                int target_id, const Tensor& eta) {
  const int n = static_cast<int>(ep.steps.size());
  std::vector<ReplayEntry> out;
  out.reserve(ep.steps.size());
  for (int k = 0; k < n; ++k) {
    ReplayEntry e;
    e.state = ep.steps[k].state;
    e.action = ep.steps[k].action;
    e.reward = k == 0 ? ctx.reward(ep.steps[0].state) : ep.steps[k - 1].reward;
    e.t = ep.steps[k].t;
    e.terminal = ep.steps[k].terminal;
    e.target_id = target_id;
    e.eta = eta;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace molrl

#endif  // MOLRL_TRAIN_REPLAY_HPP_
