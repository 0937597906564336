//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// The full model: a deterministic state encoder, a stochastic target encoder
// producing a per-molecule Gaussian (mu, log standard deviation), and a value
// head scoring (state, latent, step) triples. The two encoders share an
// architecture and never share weights.
//
// Graphs are re-indexed into canonical atom order before packing, so an
// encoding depends only on the molecule, not on how its atoms happened to be
// numbered; two graphs with equal canonical SMILES encode bit-identically.

#ifndef MOLRL_MODEL_MODEL_HPP_
#define MOLRL_MODEL_MODEL_HPP_

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "molrl/chem/canonical.hpp"
#include "molrl/chem/mol_graph.hpp"
#include "molrl/chem/smiles.hpp"
#include "molrl/model/encoder.hpp"
#include "molrl/nn/adam.hpp"
#include "molrl/nn/layers.hpp"
#include "molrl/nn/tape.hpp"
#include "molrl/nn/tensor.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

inline constexpr int kValueInDim = 2 * kLatentDim + 2;  // state, latent, t1, t2
inline constexpr int kValueHidden = 256;

// Canonical-order rebuild used by every encoding entry point. Parsing the
// canonical SMILES back yields atoms in emission order with aromaticity
// perceived and explicit hydrogens folded, which is exactly the form both
// targets and rollout states should agree on.
inline MolGraph encoding_form(const MolGraph& g) {
  if (g.empty()) return g;
  return parse_smiles(write_canonical_smiles(g));
}

// Step features fed to the value head next to the two embeddings: t1 walks
// linearly from 1 at t=0 to just above -1, and t2 flags the final step.
inline std::pair<float, float> step_features(int t, int horizon) {
  if (t < 0 || t >= horizon) {
    throw std::out_of_range("step_features: t=" + std::to_string(t) + " outside [0, " +
                            std::to_string(horizon) + ")");
  }
  const float t1 = 2.0f * static_cast<float>(horizon - t) / static_cast<float>(horizon) - 1.0f;
  const float t2 = t == horizon - 1 ? 1.0f : 0.0f;
  return {t1, t2};
}

struct EmbeddingDistribution {
  Tensor mu;         // [1, kLatentDim]
  Tensor log_sigma;  // [1, kLatentDim], already clamped to [-10, 10]

  // Reparameterized draw mu + exp(log_sigma) * eta with eta standard normal,
  // consumed element by element in index order.
  Tensor sample(Rng& rng) const {
    Tensor z = mu;
    for (int c = 0; c < z.cols; ++c) {
      z.at(0, c) += std::exp(log_sigma.at(0, c)) * static_cast<float>(rng.normal());
    }
    return z;
  }

  // KL against the unit Gaussian prior: 1/2 sum(mu^2 + sigma^2 - 1 - log sigma^2).
  double kl() const {
    double acc = 0.0;
    for (int c = 0; c < mu.cols; ++c) {
      const double m = mu.at(0, c);
      const double l = log_sigma.at(0, c);
      acc += m * m + std::exp(2.0 * l) - 1.0 - 2.0 * l;
    }
    return 0.5 * acc;
  }
};

// Standard-normal row tensor; the per-episode noise that freezes a target
// sample across all of an episode's steps is drawn through this.
inline Tensor standard_normal_row(Rng& rng, int cols) {
  Tensor eta(1, cols);
  for (int c = 0; c < cols; ++c) eta.at(0, c) = static_cast<float>(rng.normal());
  return eta;
}

// Elementwise KL integrand mu^2 + e^(2 ls) - 1 - 2 ls per latent dimension;
// summing and halving gives the divergence. Kept as a tape node so the loss
// can backpropagate into the target encoder.
inline int kl_terms(Tape& tape, int mu, int log_sigma) {
  const int m2 = tape.mul(mu, mu);
  const int var = tape.exp(tape.affine(log_sigma, 2.0f, 0.0f));
  return tape.add(m2, tape.sub(var, tape.affine(log_sigma, 2.0f, 1.0f)));
}

struct Model {
  StateEncoderP state;
  TargetEncoderP target;
  LinearP v1;  // [kValueInDim, kValueHidden]
  LinearP v2;  // [kValueHidden, 1]
  int horizon = 20;

  Model() = default;
  explicit Model(Rng& rng)
      : state(rng),
        target(rng),
        v1(kValueInDim, kValueHidden, true, rng),
        v2(kValueHidden, 1, true, rng) {}

  ParamList collect() {
    ParamList out;
    state.collect("state", out);
    target.collect("target", out);
    v1.collect("value.l1", out);
    v2.collect("value.l2", out);
    return out;
  }
};

// Value head over row-aligned state embeddings, latents, and steps:
// g = linear(514 -> 256) -> ReLU -> linear(256 -> 1), one row per example.
inline int value_batch(Tape& tape, Model& m, int state_rows, int latent_rows,
                       const std::vector<int>& ts) {
  const int n = tape.val(state_rows).rows;
  Tensor tcols(n, 2);
  for (int i = 0; i < n; ++i) {
    const auto [t1, t2] = step_features(ts[i], m.horizon);
    tcols.at(i, 0) = t1;
    tcols.at(i, 1) = t2;
  }
  const int joined = tape.concat_cols({state_rows, latent_rows, tape.constant(tcols)});
  return linear(tape, m.v2, tape.relu(linear(tape, m.v1, joined)));
}

// -- Single-molecule conveniences (tests, CLI, small-scale evaluation) -----

inline Tensor state_embedding(Model& m, const MolGraph& s) {
  const MolGraph canon = encoding_form(s);
  Tape tape;
  const int out = encode_states(tape, m.state, GraphBatch::pack_one(canon));
  return tape.val(out);
}

inline EmbeddingDistribution target_distribution(Model& m, const MolGraph& y) {
  const MolGraph canon = encoding_form(y);
  Tape tape;
  const TargetHeads heads = encode_targets(tape, m.target, GraphBatch::pack_one(canon));
  return {tape.val(heads.mu), tape.val(heads.log_sigma)};
}

inline double value(Model& m, const MolGraph& s, const Tensor& z, int t) {
  Tape tape;
  const int states = encode_states(tape, m.state, GraphBatch::pack_one(encoding_form(s)));
  const int v = value_batch(tape, m, states, tape.constant(z), {t});
  return tape.val(v).at(0, 0);
}

// -- Batched inference without a tape --------------------------------------
//
// Rollouts evaluate the value head over thousands of candidate successors
// per parameter snapshot. State embeddings are cached under their canonical
// SMILES (rollout frontiers revisit the same small states constantly), cache
// misses are encoded together in one packed batch, and the two dense layers
// run through the deterministic matrix kernels directly. The cache belongs
// to one parameter snapshot: call invalidate() after any update.
class ValueFastPath {
 public:
  explicit ValueFastPath(Model& m) : model_(&m) {}

  void invalidate() {
    index_.clear();
    store_.clear();
  }

  // values[i] = V(states[i], *latents[i], ts[i]).
  std::vector<float> values(const std::vector<const MolGraph*>& states,
                            const std::vector<const Tensor*>& latents,
                            const std::vector<int>& ts) {
    const int n = static_cast<int>(states.size());
    std::vector<int> rows(n);
    std::vector<std::string> miss_keys;
    std::vector<MolGraph> miss_graphs;
    for (int i = 0; i < n; ++i) {
      const std::string key = states[i]->empty() ? "" : write_canonical_smiles(*states[i]);
      const auto it = index_.find(key);
      if (it != index_.end()) {
        rows[i] = it->second;
        continue;
      }
      const int row = static_cast<int>(store_.size());
      index_.emplace(key, row);
      store_.emplace_back();  // filled below
      miss_keys.push_back(key);
      miss_graphs.push_back(key.empty() ? MolGraph() : parse_smiles(key));
      rows[i] = row;
    }
    if (!miss_graphs.empty()) {
      std::vector<const MolGraph*> ptrs;
      ptrs.reserve(miss_graphs.size());
      for (const MolGraph& g : miss_graphs) ptrs.push_back(&g);
      Tape tape;
      const Tensor emb = tape.val(encode_states(tape, model_->state, GraphBatch::pack(ptrs)));
      const int base = static_cast<int>(store_.size()) - static_cast<int>(miss_graphs.size());
      for (std::size_t k = 0; k < miss_graphs.size(); ++k) {
        Tensor row(1, kLatentDim);
        row.row(0) = emb.row(static_cast<int>(k));
        store_[base + static_cast<std::size_t>(k)] = std::move(row);
      }
    }

    Tensor in(n, kValueInDim);
    for (int i = 0; i < n; ++i) {
      float* dst = in.row_ptr(i);
      const Tensor& s = store_[rows[i]];
      std::copy(s.data.begin(), s.data.end(), dst);
      const Tensor& z = *latents[i];
      std::copy(z.data.begin(), z.data.end(), dst + kLatentDim);
      const auto [t1, t2] = step_features(ts[i], model_->horizon);
      dst[2 * kLatentDim] = t1;
      dst[2 * kLatentDim + 1] = t2;
    }
    Tensor h(n, kValueHidden);
    detail::gemm_accumulate(in, model_->v1.w, h);
    for (int i = 0; i < n; ++i) h.row(i) = (h.row(i) + model_->v1.b.row(0)).max(0.0f);
    Tensor out(n, 1);
    detail::gemm_accumulate(h, model_->v2.w, out);
    std::vector<float> vals(n);
    for (int i = 0; i < n; ++i) vals[i] = out.at(i, 0) + model_->v2.b.at(0, 0);
    return vals;
  }

  double value(const MolGraph& s, const Tensor& z, int t) {
    return values({&s}, {&z}, {t})[0];
  }

  // Cached state embedding, encoding on miss.
  const Tensor& state_row(const MolGraph& s) {
    const Tensor z(1, kLatentDim);
    values({&s}, {&z}, {0});
    const std::string key = s.empty() ? "" : write_canonical_smiles(s);
    return store_[index_.at(key)];
  }

  std::size_t cache_size() const { return store_.size(); }

 private:
  Model* model_;
  std::unordered_map<std::string, int> index_;
  std::vector<Tensor> store_;
};

}  // namespace molrl

#endif  // MOLRL_MODEL_MODEL_HPP_
