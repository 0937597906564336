//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "molrl/chem/canonical.hpp"
#include "molrl/chem/smiles.hpp"
#include "molrl/model/encoder.hpp"
#include "molrl/model/model.hpp"
#include "molrl/nn/checkpoint.hpp"
#include "molrl/nn/grad_check.hpp"
#include "molrl/util/rng.hpp"

using namespace molrl;
using Catch::Approx;

namespace {

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data.data(), b.data.data(), a.size() * sizeof(float)) == 0;
}

MolGraph permute(const MolGraph& g, const std::vector<int>& perm) {
  MolGraph out;
  std::vector<int> inv(g.num_atoms());
  for (int v = 0; v < g.num_atoms(); ++v) inv[perm[v]] = v;
  for (int v = 0; v < g.num_atoms(); ++v)
    out.add_atom(g.atom(inv[v]).element, g.atom(inv[v]).h_count);
  for (const Bond& b : g.bonds()) out.add_bond(perm[b.a], perm[b.b], b.order);
  return out;
}

}  // namespace

TEST_CASE("graph encoding") {
  Rng rng(100);
  Model model(rng);

  SECTION("atom relabeling leaves embeddings bit-unchanged") {
    const MolGraph g = parse_smiles("CC(=O)OC");
    Rng shuffler(3);
    std::vector<int> perm(g.num_atoms());
    for (int i = 0; i < g.num_atoms(); ++i) perm[i] = i;
    for (int trial = 0; trial < 5; ++trial) {
      shuffler.shuffle(perm);
      const MolGraph h = permute(g, perm);
      REQUIRE(canonical_equal(g, h));
      CHECK(bit_equal(state_embedding(model, g), state_embedding(model, h)));
      const EmbeddingDistribution a = target_distribution(model, g);
      const EmbeddingDistribution b = target_distribution(model, h);
      CHECK(bit_equal(a.mu, b.mu));
      CHECK(bit_equal(a.log_sigma, b.log_sigma));
    }
  }

  SECTION("aromatic and kekulized inputs of one molecule encode identically") {
    const MolGraph a = parse_smiles("c1ccccc1");
    const MolGraph k = parse_smiles("C1=CC=CC=C1");
    CHECK(bit_equal(state_embedding(model, a), state_embedding(model, k)));
  }

  SECTION("empty graph reads out as the zero vector") {
    const Tensor z = state_embedding(model, MolGraph());
    CHECK(z.rows == 1);
    CHECK(z.cols == kLatentDim);
    for (float v : z.data) CHECK(v == 0.0f);
  }

  SECTION("single atoms of different elements embed differently") {
    std::vector<Tensor> embs;
    for (const char* smi : {"C", "N", "O", "[H]"}) {
      embs.push_back(state_embedding(model, parse_smiles(smi)));
    }
    for (std::size_t i = 0; i < embs.size(); ++i) {
      for (std::size_t j = i + 1; j < embs.size(); ++j) {
        CHECK_FALSE(bit_equal(embs[i], embs[j]));
      }
    }
  }

  SECTION("batched packing equals one-by-one encoding") {
    const MolGraph g1 = parse_smiles("CCO");
    const MolGraph g2;  // empty graph mid-batch
    const MolGraph g3 = parse_smiles("C1CC1");
    const MolGraph c1 = encoding_form(g1);
    const MolGraph c3 = encoding_form(g3);
    Tape tape;
    const Tensor batch =
        tape.val(encode_states(tape, model.state, GraphBatch::pack({&c1, &g2, &c3})));
    REQUIRE(batch.rows == 3);
    const Tensor s1 = state_embedding(model, g1);
    const Tensor s3 = state_embedding(model, g3);
    for (int c = 0; c < kLatentDim; ++c) {
      CHECK(batch.at(0, c) == s1.at(0, c));
      CHECK(batch.at(1, c) == 0.0f);
      CHECK(batch.at(2, c) == s3.at(0, c));
    }
  }

  SECTION("state and target encoders do not share weights") {
    // Same trunk shapes, independently initialized: the two encoders give
    // different node transforms by construction.
    CHECK_FALSE(bit_equal(model.state.enc.node_in.w, model.target.enc.node_in.w));
    const Tensor s = state_embedding(model, parse_smiles("CCO"));
    const EmbeddingDistribution d = target_distribution(model, parse_smiles("CCO"));
    CHECK_FALSE(bit_equal(s, d.mu));
  }
}

TEST_CASE("embedding distribution") {
  SECTION("clamped log sigma floor makes samples track the mean") {
    EmbeddingDistribution d;
    d.mu = Tensor::full(1, kLatentDim, 0.7f);
    d.log_sigma = Tensor::full(1, kLatentDim, -10.0f);
    Rng rng(4);
    const Tensor z = d.sample(rng);
    for (int c = 0; c < kLatentDim; ++c) {
      CHECK(std::fabs(z.at(0, c) - 0.7f) < 1e-3f);
    }
  }

  SECTION("fixed seed gives a reproducible sample") {
    EmbeddingDistribution d;
    d.mu = Tensor(1, kLatentDim);
    d.log_sigma = Tensor(1, kLatentDim);
    Rng r1(9);
    Rng r2(9);
    CHECK(bit_equal(d.sample(r1), d.sample(r2)));
    Rng r3(10);
    CHECK_FALSE(bit_equal(d.sample(r1), d.sample(r3)));
  }

  SECTION("sample mean approaches the mean within Monte-Carlo error") {
    EmbeddingDistribution d;
    d.mu = Tensor(1, kLatentDim);
    d.log_sigma = Tensor(1, kLatentDim);  // sigma = 1 everywhere
    for (int c = 0; c < kLatentDim; ++c) d.mu.at(0, c) = 0.01f * static_cast<float>(c);
    Rng rng(11);
    const int draws = 10000;
    std::vector<double> acc(kLatentDim, 0.0);
    for (int i = 0; i < draws; ++i) {
      const Tensor z = d.sample(rng);
      for (int c = 0; c < kLatentDim; ++c) acc[c] += z.at(0, c);
    }
    // Standard error is 1/sqrt(draws) = 0.01 per coordinate.
    for (int c = 0; c < kLatentDim; ++c) {
      CHECK(std::fabs(acc[c] / draws - d.mu.at(0, c)) < 5.0 * 0.01);
    }
  }

  SECTION("kl closed forms") {
    EmbeddingDistribution prior;
    prior.mu = Tensor(1, kLatentDim);
    prior.log_sigma = Tensor(1, kLatentDim);
    CHECK(prior.kl() == 0.0);

    EmbeddingDistribution shifted;
    shifted.mu = Tensor::full(1, kLatentDim, 1.0f);
    shifted.log_sigma = Tensor(1, kLatentDim);
    CHECK(shifted.kl() == Approx(128.0).epsilon(1e-9));

    Rng rng(12);
    EmbeddingDistribution random;
    random.mu = Tensor(1, kLatentDim);
    random.log_sigma = Tensor(1, kLatentDim);
    random.mu.fill_uniform(rng, 1.0f);
    random.log_sigma.fill_uniform(rng, 1.0f);
    CHECK(random.kl() > 0.0);

    // Tape expression agrees with the closed form.
    Tape tape;
    const int terms =
        kl_terms(tape, tape.constant(random.mu), tape.constant(random.log_sigma));
    const double on_tape = 0.5 * tape.val(tape.sum(terms)).at(0, 0);
    CHECK(on_tape == Approx(random.kl()).epsilon(1e-5));
  }
}

TEST_CASE("value head") {
  SECTION("step features at the episode ends") {
    CHECK(step_features(0, 20).first == 1.0f);
    CHECK(step_features(0, 20).second == 0.0f);
    CHECK(step_features(19, 20).first == -0.9f);
    CHECK(step_features(19, 20).second == 1.0f);
    CHECK(step_features(10, 20).first == 0.0f);
    CHECK_THROWS_AS(step_features(20, 20), std::out_of_range);
    CHECK_THROWS_AS(step_features(-1, 20), std::out_of_range);
  }

  SECTION("zero-initialized head scores everything zero") {
    Rng rng(13);
    Model model(rng);
    model.v1.w.fill(0.0f);
    model.v1.b.fill(0.0f);
    model.v2.w.fill(0.0f);
    model.v2.b.fill(0.0f);
    Tensor z(1, kLatentDim);
    z.fill_uniform(rng, 1.0f);
    CHECK(value(model, parse_smiles("CCO"), z, 0) == 0.0f);
    CHECK(value(model, MolGraph(), z, 19) == 0.0f);
  }

  SECTION("value is a pure function of canonical state, latent, and step") {
    Rng rng(14);
    Model model(rng);
    Tensor z(1, kLatentDim);
    z.fill_uniform(rng, 1.0f);
    const double v1 = value(model, parse_smiles("OCC"), z, 3);
    const double v2 = value(model, parse_smiles("CCO"), z, 3);
    CHECK(v1 == v2);
    CHECK(value(model, parse_smiles("CCO"), z, 4) != v1);
  }

  SECTION("fast path matches the tape path bit for bit") {
    Rng rng(15);
    Model model(rng);
    ValueFastPath fast(model);
    std::vector<MolGraph> states;
    for (const char* smi : {"C", "CC", "CCO", "C1CC1", "C=O", "N"}) {
      states.push_back(parse_smiles(smi));
    }
    states.emplace_back();  // empty state
    std::vector<Tensor> zs;
    for (std::size_t i = 0; i < states.size(); ++i) {
      Tensor z(1, kLatentDim);
      z.fill_uniform(rng, 1.0f);
      zs.push_back(std::move(z));
    }
    std::vector<const MolGraph*> sp;
    std::vector<const Tensor*> zp;
    std::vector<int> ts;
    for (std::size_t i = 0; i < states.size(); ++i) {
      sp.push_back(&states[i]);
      zp.push_back(&zs[i]);
      ts.push_back(static_cast<int>(i) % 20);
    }
    const std::vector<float> got = fast.values(sp, zp, ts);
    for (std::size_t i = 0; i < states.size(); ++i) {
      const double want = value(model, states[i], zs[i], ts[i]);
      CHECK(got[i] == static_cast<float>(want));
    }
    // Second call is served from the cache and agrees.
    const std::size_t cached = fast.cache_size();
    CHECK(fast.values(sp, zp, ts) == got);
    CHECK(fast.cache_size() == cached);
  }
}

TEST_CASE("model gradients and serialization") {
  SECTION("value plus kl objective passes the finite-difference check") {
    Rng rng(16);
    Model model(rng);
    const MolGraph s = parse_smiles("CCO");
    const MolGraph y = parse_smiles("CC=O");
    const MolGraph sc = encoding_form(s);
    const MolGraph yc = encoding_form(y);
    Rng noise(17);
    const Tensor eta = standard_normal_row(noise, kLatentDim);

    ParamList params = model.collect();
    std::vector<Tensor*> tensors;
    for (const NamedParam& p : params) tensors.push_back(p.tensor);

    const GradFn f = [&](std::vector<Tensor>* grads) {
      Tape tape;
      const int states = encode_states(tape, model.state, GraphBatch::pack_one(sc));
      const TargetHeads heads = encode_targets(tape, model.target, GraphBatch::pack_one(yc));
      const int z =
          tape.add(heads.mu, tape.mul(tape.exp(heads.log_sigma), tape.constant(eta)));
      const int v = value_batch(tape, model, states, z, {5});
      const int kl = tape.affine(tape.sum(kl_terms(tape, heads.mu, heads.log_sigma)), 0.5f, 0.0f);
      const int loss = tape.add(v, tape.affine(kl, 0.01f, 0.0f));
      const double out = tape.val(loss).at(0, 0);
      if (grads) {
        grads->clear();
        tape.backward(loss);
        for (const NamedParam& p : params) {
          const Tensor& g = tape.param_grad(p.tensor);
          grads->push_back(g.empty() ? Tensor(p.tensor->rows, p.tensor->cols) : g);
        }
      }
      return out;
    };

    Rng probe(18);
    const auto report = grad_check(f, tensors, 2, probe);
    INFO("max rel err " << report.max_rel_err << " at param " << report.worst_param
                        << " (" << (report.worst_param >= 0
                                        ? params[report.worst_param].name
                                        : std::string("none"))
                        << ") analytic " << report.worst_analytic << " numeric "
                        << report.worst_numeric);
    CHECK(report.within(1e-3));
  }

  SECTION("full model checkpoints round trip") {
    Rng rng(19);
    Model model(rng);
    ParamList params = model.collect();
    Checkpoint ck;
    ck.put(params);

    Rng rng2(20);
    Model other(rng2);
    ck.restore(other.collect());
    const MolGraph m = parse_smiles("CC(C)O");
    CHECK(bit_equal(state_embedding(model, m), state_embedding(other, m)));
    const EmbeddingDistribution d1 = target_distribution(model, m);
    const EmbeddingDistribution d2 = target_distribution(other, m);
    CHECK(bit_equal(d1.mu, d2.mu));
    CHECK(bit_equal(d1.log_sigma, d2.log_sigma));
  }
}
