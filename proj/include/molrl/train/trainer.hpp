//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Training loop: replay-buffer filling with paired exploration/idealized
// episodes, Double-Q TD targets over successor states, and the combined
// Huber(TD) + KL loss with terminal/non-terminal mass balancing.
//
// The buffer stores the per-episode latent noise (eta) rather than the
// sampled embedding itself: the episode's draw stays frozen, while the loss
// rebuilds z = mu + exp(log_sigma) * eta from the current encoder so value
// gradients reach the target encoder. Double Q-learning picks the best
// successor with the online network and evaluates it with the target
// network; the target network is a hard copy synced on a fixed period.

#ifndef MOLRL_TRAIN_TRAINER_HPP_
#define MOLRL_TRAIN_TRAINER_HPP_

#include <cassert>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "molrl/fp/similarity.hpp"
#include "molrl/mdp/mdp.hpp"
#include "molrl/model/model.hpp"
#include "molrl/nn/adam.hpp"
#include "molrl/nn/checkpoint.hpp"
#include "molrl/train/config.hpp"
#include "molrl/train/replay.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

// Per-example loss weights that give terminal and non-terminal examples the
// same total mass: each class receives half the batch weight, split evenly
// inside the class, so the weights sum back to the batch size. A batch with
// only one class present keeps unit weights (there is nothing to balance).
inline std::vector<float> terminal_balance_weights(const std::vector<bool>& terminal,
                                                   bool* balanced = nullptr) {
  const int n = static_cast<int>(terminal.size());
  int n_term = 0;
  for (bool t : terminal) n_term += t ? 1 : 0;
  const int n_non = n - n_term;
  std::vector<float> w(terminal.size(), 1.0f);
  const bool both = n_term > 0 && n_non > 0;
  if (balanced != nullptr) *balanced = both;
  if (!both) return w;
  const float wt = static_cast<float>(n / (2.0 * n_term));
  const float wn = static_cast<float>(n / (2.0 * n_non));
  for (int i = 0; i < n; ++i) w[i] = terminal[i] ? wt : wn;
  return w;
}

struct StepStats {
  std::int64_t step = 0;
  double lr = 0.0;
  double epsilon = 0.0;
  double td_loss = 0.0;
  double kl = 0.0;
  double loss = 0.0;
  std::size_t buffer_size = 0;
  std::int64_t idealized_failures = 0;
};

class Trainer {
 public:
  Trainer(TrainConfig cfg, std::vector<MolGraph> targets, std::uint64_t seed)
      : cfg_(std::move(cfg)), master_(seed) {
    cfg_.validate();
    if (targets.empty()) throw std::invalid_argument("trainer: empty target set");
    mdp_cfg_ = MdpConfig::decoder();
    mdp_cfg_.max_steps = cfg_.horizon;
    targets_.reserve(targets.size());
    reward_ctxs_.reserve(targets.size());
    for (const MolGraph& y : targets) {
      if (y.empty()) throw std::invalid_argument("trainer: empty target molecule");
      targets_.push_back(encoding_form(y));
      reward_ctxs_.emplace_back(targets_.back());
    }
    Rng init = master_.fork(0);
    online_ = std::make_unique<Model>(init);
    online_->horizon = cfg_.horizon;
    Rng init2 = master_.fork(1);
    target_ = std::make_unique<Model>(init2);
    target_->horizon = cfg_.horizon;
    params_ = online_->collect();
    target_params_ = target_->collect();
    adam_ = std::make_unique<Adam>(params_);
    online_fp_ = std::make_unique<ValueFastPath>(*online_);
    target_fp_ = std::make_unique<ValueFastPath>(*target_);
    buffer_ = std::make_unique<ReplayBuffer>(cfg_.buffer_capacity, cfg_.buffer_warmup);
    episode_rng_ = master_.fork(2);
    sample_rng_ = master_.fork(3);
    rollout_rngs_.reserve(static_cast<std::size_t>(cfg_.episode_batch));
    for (int b = 0; b < cfg_.episode_batch; ++b) {
      rollout_rngs_.push_back(master_.fork(16 + static_cast<std::uint64_t>(b)));
    }
    sync_target();
  }

  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  // One buffer refresh: per drawn target, one epsilon-greedy rollout and one
  // idealized reconstruction, each under its own frozen latent draw. A
  // failed idealized construction is counted and only the rollout is kept.
  void fill_step(double eps) {
    const int B = cfg_.episode_batch;
    std::vector<int> ids(B);
    for (int b = 0; b < B; ++b) {
      ids[b] = static_cast<int>(episode_rng_.below(targets_.size()));
    }

    std::vector<const MolGraph*> tptrs(B);
    for (int b = 0; b < B; ++b) tptrs[b] = &targets_[ids[b]];
    Tape tape;
    const TargetHeads th = encode_targets(tape, online_->target, GraphBatch::pack(tptrs));
    const Tensor& mu = tape.val(th.mu);
    const Tensor& ls = tape.val(th.log_sigma);

    std::vector<Tensor> eta_greedy(B), eta_ideal(B), z_greedy(B);
    for (int b = 0; b < B; ++b) {
      eta_greedy[b] = standard_normal_row(episode_rng_, kLatentDim);
      eta_ideal[b] = standard_normal_row(episode_rng_, kLatentDim);
      z_greedy[b] = combine_latent(mu, ls, b, eta_greedy[b]);
    }

    std::vector<const RewardContext*> rcs(B);
    for (int b = 0; b < B; ++b) rcs[b] = &reward_ctxs_[ids[b]];
    const auto value_fn = [&](const std::vector<const MolGraph*>& succ,
                              const std::vector<int>& episode_of, int t_next) {
      const std::size_t n = succ.size();
      std::vector<const Tensor*> zs(n);
      for (std::size_t i = 0; i < n; ++i) zs[i] = &z_greedy[episode_of[i]];
      // The final action's successors sit one step past the value head's
      // domain; querying them at the last in-domain step scores them by the
      // terminal-reward estimate, which is what the final choice maximizes.
      const int tq = std::min(t_next, cfg_.horizon - 1);
      return online_fp_->values(succ, zs, std::vector<int>(n, tq));
    };
    const std::vector<Episode> episodes =
        batched_rollout(tptrs, rcs, value_fn, eps, rollout_rngs_, mdp_cfg_);

    for (int b = 0; b < B; ++b) {
      for (ReplayEntry& e :
           episode_entries(episodes[b], reward_ctxs_[ids[b]], ids[b], eta_greedy[b])) {
        buffer_->push(std::move(e));
      }
      const std::optional<Episode>& ideal = idealized_for(ids[b]);
      if (!ideal.has_value()) {
        ++idealized_failures_;
        continue;
      }
      for (ReplayEntry& e :
           episode_entries(*ideal, reward_ctxs_[ids[b]], ids[b], eta_ideal[b])) {
        buffer_->push(std::move(e));
      }
    }
  }

  void warm_up() {
    while (!buffer_->warmed_up()) fill_step(cfg_.eps.at(0));
  }

  // TD targets for a batch of entries. Non-terminal entries enumerate the
  // successors of their stored state, pick the best one with the online
  // network, and evaluate that successor with the target network; terminal
  // entries and gamma = 0 reduce to the stored reward, with no target-network
  // read at all in the gamma = 0 case.
  std::vector<float> td_targets(const std::vector<const ReplayEntry*>& batch) {
    std::vector<int> distinct, row_of;
    collect_targets(batch, &distinct, &row_of);
    Tape tape;
    const TargetHeads th = encode_online_targets(tape, distinct);
    return td_targets_with(batch, tape.val(th.mu), tape.val(th.log_sigma), row_of, distinct);
  }

  // One optimizer step on a uniform sample from the buffer.
  StepStats loss_step(double lr, double epsilon) {
    assert(buffer_->warmed_up());
    const int N = cfg_.loss_batch;
    std::vector<const ReplayEntry*> batch(N);
    for (int k = 0; k < N; ++k) batch[k] = &buffer_->sample(sample_rng_);

    std::vector<int> distinct, row_of;
    collect_targets(batch, &distinct, &row_of);
    const int K = static_cast<int>(distinct.size());

    Tape tape;
    const TargetHeads th = encode_online_targets(tape, distinct);
    const std::vector<float> td =
        td_targets_with(batch, tape.val(th.mu), tape.val(th.log_sigma), row_of, distinct);

    // Value predictions for the stored states, with z rebuilt from the fresh
    // posterior and the frozen per-episode noise so gradients reach both
    // encoders.
    std::vector<MolGraph> canon(N);
    std::vector<const MolGraph*> sptrs(N);
    for (int k = 0; k < N; ++k) {
      canon[k] = encoding_form(batch[k]->state);
      sptrs[k] = &canon[k];
    }
    const int srows = encode_states(tape, online_->state, GraphBatch::pack(sptrs));
    const int mu_g = tape.gather_rows(th.mu, row_of);
    const int ls_g = tape.gather_rows(th.log_sigma, row_of);
    Tensor etas(N, kLatentDim);
    std::vector<int> ts(N);
    std::vector<bool> terminal(N);
    Tensor td_col(N, 1);
    for (int k = 0; k < N; ++k) {
      etas.row(k) = batch[k]->eta.row(0);
      ts[k] = batch[k]->t;
      terminal[k] = batch[k]->terminal;
      td_col.at(k, 0) = td[k];
    }
    const int z = tape.add(mu_g, tape.mul(tape.exp(ls_g), tape.constant(std::move(etas))));
    const int v = value_batch(tape, *online_, srows, z, ts);

    bool balanced = false;
    const std::vector<float> w = terminal_balance_weights(terminal, &balanced);
    if (!balanced) {
      ++unbalanced_batches_;
      std::fprintf(stderr, "trainer: step %" PRId64 " batch has a single example class, weights kept at 1\n",
                   step_ + 1);
    }
    Tensor w_col(N, 1);
    for (int k = 0; k < N; ++k) w_col.at(k, 0) = w[k];

    const int resid = tape.sub(v, tape.constant(std::move(td_col)));
    const int hub = tape.huber(resid, static_cast<float>(cfg_.huber_delta));
    const int td_node = tape.affine(tape.sum(tape.mul(hub, tape.constant(std::move(w_col)))),
                                    1.0f / static_cast<float>(N), 0.0f);
    const int kl_node = tape.affine(tape.sum(kl_terms(tape, th.mu, th.log_sigma)),
                                    0.5f / static_cast<float>(K), 0.0f);
    const int total = cfg_.lambda > 0.0
                          ? tape.add(td_node, tape.affine(kl_node, static_cast<float>(cfg_.lambda), 0.0f))
                          : td_node;

    StepStats st;
    st.td_loss = tape.val(td_node).at(0, 0);
    st.kl = tape.val(kl_node).at(0, 0);
    st.loss = tape.val(total).at(0, 0);
    if (!std::isfinite(st.loss)) {
      dump_diagnostics(st, batch);
      throw std::runtime_error("trainer: non-finite loss at step " + std::to_string(step_ + 1));
    }

    tape.backward(total);
    std::vector<Tensor> grads;
    grads.reserve(params_.size());
    for (const NamedParam& p : params_) grads.push_back(tape.param_grad(p.tensor));
    adam_->step(grads, lr);
    online_fp_->invalidate();

    ++step_;
    if (step_ % cfg_.target_sync == 0) sync_target();

    st.step = step_;
    st.lr = lr;
    st.epsilon = epsilon;
    st.buffer_size = buffer_->size();
    st.idealized_failures = idealized_failures_;
    return st;
  }

  // Full loop: initial checkpoint, warm-up fills, then steps of
  // {fill, sample, loss, sync} with one CSV row per step and checkpoints on
  // the configured cadence. The final state is always checkpointed.
  void run(int steps, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::ofstream csv(out_dir + "/metrics.csv");
    if (!csv) throw std::runtime_error("trainer: cannot write " + out_dir + "/metrics.csv");
    csv << "step,lr,epsilon,td_loss,kl,buffer_size,idealized_failures\n";
    save_checkpoint_file(out_dir);
    if (steps > 0) {
      warm_up();
      for (int i = 0; i < steps; ++i) {
        const double epsilon = cfg_.eps.at(step_);
        const double lr = cfg_.lr.at(step_);
        fill_step(epsilon);
        const StepStats st = loss_step(lr, epsilon);
        csv << csv_row(st);
        csv.flush();
        if (cfg_.checkpoint_every > 0 && step_ % cfg_.checkpoint_every == 0) {
          save_checkpoint_file(out_dir);
        }
      }
      save_checkpoint_file(out_dir);
    }
  }

  Checkpoint make_checkpoint() const {
    Checkpoint ck;
    ck.step = static_cast<std::uint64_t>(step_);
    ck.rng_state = episode_rng_.state();
    ck.put(params_);
    return ck;
  }

  static std::string checkpoint_name(std::int64_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "checkpoint_%06" PRId64 ".ckpt", step);
    return buf;
  }

  static std::string csv_row(const StepStats& st) {
    char buf[224];
    std::snprintf(buf, sizeof buf, "%" PRId64 ",%.9g,%.9g,%.9g,%.9g,%zu,%" PRId64 "\n", st.step,
                  st.lr, st.epsilon, st.td_loss, st.kl, st.buffer_size, st.idealized_failures);
    return buf;
  }

  const TrainConfig& config() const { return cfg_; }
  const MdpConfig& mdp_config() const { return mdp_cfg_; }
  const std::vector<MolGraph>& targets() const { return targets_; }
  const RewardContext& reward_context(int id) const { return reward_ctxs_[id]; }
  ReplayBuffer& buffer() { return *buffer_; }
  Model& online() { return *online_; }
  Model& target_model() { return *target_; }
  ValueFastPath& online_fast_path() { return *online_fp_; }
  ValueFastPath& target_fast_path() { return *target_fp_; }
  std::int64_t step() const { return step_; }
  std::int64_t target_reads() const { return target_reads_; }
  std::int64_t idealized_failures() const { return idealized_failures_; }
  std::int64_t unbalanced_batches() const { return unbalanced_batches_; }

 private:
  // z = mu + exp(log_sigma) * eta for row `row` of batched posterior outputs.
  static Tensor combine_latent(const Tensor& mu, const Tensor& ls, int row, const Tensor& eta) {
    Tensor z(1, kLatentDim);
    for (int c = 0; c < kLatentDim; ++c) {
      z.at(0, c) = mu.at(row, c) + std::exp(ls.at(row, c)) * eta.at(0, c);
    }
    return z;
  }

  void collect_targets(const std::vector<const ReplayEntry*>& batch, std::vector<int>* distinct,
                       std::vector<int>* row_of) const {
    std::unordered_map<int, int> seen;
    row_of->resize(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const int id = batch[k]->target_id;
      const auto it = seen.find(id);
      if (it == seen.end()) {
        const int row = static_cast<int>(distinct->size());
        seen.emplace(id, row);
        distinct->push_back(id);
        (*row_of)[k] = row;
      } else {
        (*row_of)[k] = it->second;
      }
    }
  }

  TargetHeads encode_online_targets(Tape& tape, const std::vector<int>& distinct) {
    std::vector<const MolGraph*> ptrs(distinct.size());
    for (std::size_t i = 0; i < distinct.size(); ++i) ptrs[i] = &targets_[distinct[i]];
    return encode_targets(tape, online_->target, GraphBatch::pack(ptrs));
  }

  std::vector<float> td_targets_with(const std::vector<const ReplayEntry*>& batch,
                                     const Tensor& mu, const Tensor& ls,
                                     const std::vector<int>& row_of,
                                     const std::vector<int>& distinct) {
    const int N = static_cast<int>(batch.size());
    std::vector<float> td(batch.size());
    if (cfg_.gamma == 0.0) {
      // Eq. reduces to the reward; successor enumeration and the target
      // network are never touched.
      for (int k = 0; k < N; ++k) td[k] = static_cast<float>(batch[k]->reward);
      return td;
    }

    std::vector<Tensor> z_online(batch.size());
    for (int k = 0; k < N; ++k) {
      if (!batch[k]->terminal) z_online[k] = combine_latent(mu, ls, row_of[k], batch[k]->eta);
    }

    // Score every successor of every non-terminal entry in one batched call.
    std::vector<std::vector<Candidate>> cands(batch.size());
    std::vector<const MolGraph*> succ;
    std::vector<const Tensor*> succ_z;
    std::vector<int> succ_t, owner;
    for (int k = 0; k < N; ++k) {
      if (batch[k]->terminal) {
        td[k] = static_cast<float>(batch[k]->reward);
        continue;
      }
      cands[k] = enumerate_actions(batch[k]->state, mdp_cfg_);
      assert(!cands[k].empty());
      for (const Candidate& c : cands[k]) {
        succ.push_back(&c.next);
        succ_z.push_back(&z_online[k]);
        succ_t.push_back(batch[k]->t + 1);
        owner.push_back(k);
      }
    }
    if (succ.empty()) return td;
    const std::vector<float> scores = online_fp_->values(succ, succ_z, succ_t);

    // First maximum in enumeration order selects the successor.
    std::vector<const MolGraph*> best(batch.size(), nullptr);
    std::vector<float> best_score(batch.size(), 0.0f);
    for (std::size_t i = 0; i < succ.size(); ++i) {
      const int k = owner[i];
      if (best[k] == nullptr || scores[i] > best_score[k]) {
        best[k] = succ[i];
        best_score[k] = scores[i];
      }
    }

    ensure_target_dists(distinct);
    std::vector<Tensor> z_target(batch.size());
    std::vector<const MolGraph*> ev_s;
    std::vector<const Tensor*> ev_z;
    std::vector<int> ev_t, ev_owner;
    for (int k = 0; k < N; ++k) {
      if (batch[k]->terminal) continue;
      const auto& [mu_t, ls_t] = target_dists_.at(batch[k]->target_id);
      z_target[k] = combine_latent(mu_t, ls_t, 0, batch[k]->eta);
      ev_s.push_back(best[k]);
      ev_z.push_back(&z_target[k]);
      ev_t.push_back(batch[k]->t + 1);
      ev_owner.push_back(k);
    }
    const std::vector<float> evals = target_fp_->values(ev_s, ev_z, ev_t);
    target_reads_ += static_cast<std::int64_t>(evals.size());
    for (std::size_t i = 0; i < evals.size(); ++i) {
      const int k = ev_owner[i];
      td[k] = static_cast<float>(batch[k]->reward + cfg_.gamma * static_cast<double>(evals[i]));
    }
    return td;
  }

  // Target-network posterior rows, cached per target id between hard syncs.
  void ensure_target_dists(const std::vector<int>& ids) {
    std::vector<int> missing;
    for (int id : ids) {
      if (target_dists_.find(id) == target_dists_.end()) missing.push_back(id);
    }
    if (missing.empty()) return;
    std::vector<const MolGraph*> ptrs(missing.size());
    for (std::size_t i = 0; i < missing.size(); ++i) ptrs[i] = &targets_[missing[i]];
    Tape tape;
    const TargetHeads th = encode_targets(tape, target_->target, GraphBatch::pack(ptrs));
    const Tensor& mu = tape.val(th.mu);
    const Tensor& ls = tape.val(th.log_sigma);
    for (std::size_t i = 0; i < missing.size(); ++i) {
      Tensor mu_row(1, kLatentDim), ls_row(1, kLatentDim);
      mu_row.row(0) = mu.row(static_cast<int>(i));
      ls_row.row(0) = ls.row(static_cast<int>(i));
      target_dists_.emplace(missing[i], std::make_pair(std::move(mu_row), std::move(ls_row)));
    }
  }

  void sync_target() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      *target_params_[i].tensor = *params_[i].tensor;
    }
    target_fp_->invalidate();
    target_dists_.clear();
  }

  const std::optional<Episode>& idealized_for(int id) {
    auto it = idealized_.find(id);
    if (it == idealized_.end()) {
      IdealizedResult res = idealized_episode(targets_[id], mdp_cfg_, &reward_ctxs_[id]);
      it = idealized_.emplace(id, std::move(res.episode)).first;
    }
    return it->second;
  }

  void save_checkpoint_file(const std::string& out_dir) {
    if (last_checkpoint_step_ == step_) return;
    save_checkpoint(make_checkpoint(), out_dir + "/" + checkpoint_name(step_));
    last_checkpoint_step_ = step_;
  }

  void dump_diagnostics(const StepStats& st, const std::vector<const ReplayEntry*>& batch) const {
    std::fprintf(stderr,
                 "trainer: non-finite loss at step %" PRId64 " (td_loss=%g kl=%g buffer=%zu)\n",
                 step_ + 1, st.td_loss, st.kl, buffer_->size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
      const ReplayEntry& e = *batch[k];
      std::fprintf(stderr, "  entry %zu: target=%d t=%d terminal=%d reward=%g state=%s\n", k,
                   e.target_id, e.t, e.terminal ? 1 : 0, e.reward,
                   e.state.empty() ? "<empty>" : write_canonical_smiles(e.state).c_str());
    }
  }

  TrainConfig cfg_;
  MdpConfig mdp_cfg_;
  Rng master_;
  std::vector<MolGraph> targets_;
  std::vector<RewardContext> reward_ctxs_;
  std::unique_ptr<Model> online_;
  std::unique_ptr<Model> target_;
  ParamList params_;
  ParamList target_params_;
  std::unique_ptr<Adam> adam_;
  std::unique_ptr<ValueFastPath> online_fp_;
  std::unique_ptr<ValueFastPath> target_fp_;
  std::unique_ptr<ReplayBuffer> buffer_;
  Rng episode_rng_;
  Rng sample_rng_;
  std::vector<Rng> rollout_rngs_;
  std::unordered_map<int, std::pair<Tensor, Tensor>> target_dists_;
  std::unordered_map<int, std::optional<Episode>> idealized_;
  std::int64_t step_ = 0;
  std::int64_t target_reads_ = 0;
  std::int64_t idealized_failures_ = 0;
  std::int64_t unbalanced_batches_ = 0;
  std::int64_t last_checkpoint_step_ = -1;
};

}  // namespace molrl

#endif  // MOLRL_TRAIN_TRAINER_HPP_
