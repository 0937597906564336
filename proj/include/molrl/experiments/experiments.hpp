//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//
// Analysis experiments over a trained checkpoint: reconstruction metrics on
// a dataset split, a latent perturbation sweep, and a two-direction grid
// walk. Every experiment decodes latents with the same deterministic greedy
// policy (argmax successor value, first maximum on ties), so results are a
// pure function of checkpoint, inputs, and seed. Decodes advance in lockstep
// batches: one ValueFastPath::values call scores every pending candidate of
// the batch per step, which keeps the dense layers in large matrix products
// and the state-embedding cache shared across episodes.

#ifndef MOLRL_EXPERIMENTS_EXPERIMENTS_HPP_
#define MOLRL_EXPERIMENTS_EXPERIMENTS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "molrl/chem/canonical.hpp"
#include "molrl/chem/mol_graph.hpp"
#include "molrl/editdist/edit_distance.hpp"
#include "molrl/fp/fingerprint.hpp"
#include "molrl/fp/similarity.hpp"
#include "molrl/mdp/mdp.hpp"
#include "molrl/model/model.hpp"
#include "molrl/nn/checkpoint.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

// Rebuilds a model from a checkpoint file. The episode horizon is a run
// setting rather than a stored tensor, so the caller supplies it; it must
// match the horizon the checkpoint was trained with for the step features
// to line up.
inline Model load_model(const std::string& checkpoint_path, int horizon) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  Rng scratch;
  Model m(scratch);
  m.horizon = horizon;
  ck.restore(m.collect());
  return m;
}

namespace detail {

// Shortest float-preserving decimal, matching the metrics CSV convention.
inline std::string g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace detail

// Decodes one latent per entry, all episodes advancing in lockstep from the
// empty state for cfg.max_steps steps. Ties go to the first maximum, the
// same rule rollouts use.
inline std::vector<MolGraph> decode_latents(ValueFastPath& fp,
                                            const std::vector<const Tensor*>& latents,
                                            const MdpConfig& cfg) {
  const int n = static_cast<int>(latents.size());
  std::vector<MolGraph> cur(n);
  for (int t = 0; t < cfg.max_steps; ++t) {
    std::vector<std::vector<Candidate>> cands(n);
    std::vector<const MolGraph*> succ;
    std::vector<const Tensor*> succ_z;
    for (int b = 0; b < n; ++b) {
      cands[b] = enumerate_actions(cur[b], cfg);
      for (const Candidate& c : cands[b]) {
        succ.push_back(&c.next);
        succ_z.push_back(latents[b]);
      }
    }
    // Successors of the final action lie one step past the value head's
    // domain; the last in-domain step scores them by the terminal-reward
    // estimate, matching what training rollouts do.
    const int tq = std::min(t + 1, cfg.max_steps - 1);
    const std::vector<float> v = fp.values(succ, succ_z, std::vector<int>(succ.size(), tq));
    std::size_t k = 0;
    for (int b = 0; b < n; ++b) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < cands[b].size(); ++c) {
        if (v[k + c] > v[k + best]) best = c;
      }
      cur[b] = std::move(cands[b][best].next);
      k += cands[b].size();
    }
  }
  return cur;
}

// Chunked front end: bounds the per-step candidate matrix while keeping the
// embedding cache shared across chunks. Chunking cannot change results
// because each episode's decode depends only on its own latent.
inline std::vector<MolGraph> decode_latents_chunked(ValueFastPath& fp,
                                                    const std::vector<const Tensor*>& latents,
                                                    const MdpConfig& cfg, int chunk) {
  if (chunk <= 0) throw std::invalid_argument("decode_latents_chunked: chunk must be positive");
  std::vector<MolGraph> out;
  out.reserve(latents.size());
  for (std::size_t lo = 0; lo < latents.size(); lo += static_cast<std::size_t>(chunk)) {
    const std::size_t hi = std::min(latents.size(), lo + static_cast<std::size_t>(chunk));
    const std::vector<const Tensor*> part(latents.begin() + static_cast<std::ptrdiff_t>(lo),
                                          latents.begin() + static_cast<std::ptrdiff_t>(hi));
    std::vector<MolGraph> got = decode_latents(fp, part, cfg);
    for (MolGraph& g : got) out.push_back(std::move(g));
  }
  return out;
}

// -- Reconstruction ---------------------------------------------------------

enum class DecodePolicy { Greedy, RandomWalk };

struct ReconstructionRow {
  std::string input;   // canonical SMILES of the target
  std::string output;  // canonical SMILES of the decode
  bool exact = false;
  double tanimoto = 0.0;              // sparse Morgan radius 3
  std::optional<int> edit_distance;   // absent when the search hit its limits
};

struct ReconstructionReport {
  std::vector<ReconstructionRow> rows;
  int exact_matches = 0;
  double accuracy = 0.0;
  double mean_tanimoto = 0.0;
  int edit_unreached = 0;
  double mean_edit_distance = 0.0;  // over rows whose search finished
};

struct EvalOptions {
  DecodePolicy policy = DecodePolicy::Greedy;
  int edit_limit = 4;                    // search-MDP depth bound
  std::size_t edit_max_states = 200000;  // search-MDP expansion bound
  int decode_batch = 64;
};

// Scores targets against their decodes: canonical-SMILES equality, Morgan
// radius-3 Tanimoto, and search-MDP edit distance from target to decode.
// Exposed separately from the decode step so the scoring pipeline can be
// validated against known-perfect decodes.
inline ReconstructionReport score_reconstruction(const std::vector<MolGraph>& targets,
                                                 const std::vector<MolGraph>& decoded,
                                                 const EvalOptions& opt = {}) {
  if (targets.size() != decoded.size()) {
    throw std::invalid_argument("score_reconstruction: size mismatch");
  }
  const int n = static_cast<int>(targets.size());
  ReconstructionReport rep;
  rep.rows.reserve(targets.size());
  double tani_sum = 0.0;
  double edit_sum = 0.0;
  int edit_reached = 0;
  for (int i = 0; i < n; ++i) {
    ReconstructionRow row;
    row.input = write_canonical_smiles(targets[i]);
    row.output = write_canonical_smiles(decoded[i]);
    row.exact = row.input == row.output;
    row.tanimoto = tanimoto(morgan_fingerprint(targets[i], 3), morgan_fingerprint(decoded[i], 3));
    const SearchResult sr =
        mdp_edit_distance(targets[i], decoded[i], opt.edit_limit, opt.edit_max_states);
    row.edit_distance = sr.distance;
    if (row.exact) ++rep.exact_matches;
    tani_sum += row.tanimoto;
    if (sr.distance.has_value()) {
      edit_sum += *sr.distance;
      ++edit_reached;
    } else {
      ++rep.edit_unreached;
    }
    rep.rows.push_back(std::move(row));
  }
  if (n > 0) {
    rep.accuracy = static_cast<double>(rep.exact_matches) / n;
    rep.mean_tanimoto = tani_sum / n;
  }
  if (edit_reached > 0) rep.mean_edit_distance = edit_sum / edit_reached;
  return rep;
}

// Encode each target, sample one embedding from its posterior, decode it
// greedily, and score the decode against the target. The random-walk policy
// ignores the latent and picks uniformly among legal actions, which is the
// no-model baseline. Sampling order is fixed by input order, so results do
// not depend on the decode batch size.
inline ReconstructionReport evaluate_reconstruction(Model& m,
                                                    const std::vector<MolGraph>& targets,
                                                    std::uint64_t seed,
                                                    const EvalOptions& opt = {}) {
  MdpConfig cfg = MdpConfig::decoder();
  cfg.max_steps = m.horizon;

  const int n = static_cast<int>(targets.size());
  std::vector<MolGraph> decoded(n);
  Rng rng(seed);
  if (opt.policy == DecodePolicy::Greedy) {
    std::vector<Tensor> zs;
    zs.reserve(targets.size());
    for (const MolGraph& y : targets) zs.push_back(target_distribution(m, y).sample(rng));
    std::vector<const Tensor*> zptrs;
    zptrs.reserve(zs.size());
    for (const Tensor& z : zs) zptrs.push_back(&z);
    ValueFastPath fp(m);
    decoded = decode_latents_chunked(fp, zptrs, cfg, opt.decode_batch);
  } else {
    for (int i = 0; i < n; ++i) {
      Rng walk = rng.fork(static_cast<std::uint64_t>(i));
      const Episode ep = rollout(nullptr, nullptr, SuccessorValueFn{}, 1.0, walk, cfg);
      decoded[i] = ep.steps.back().next;
    }
  }
  return score_reconstruction(targets, decoded, opt);
}

// Per-row CSV plus one trailing summary row whose first field is "summary";
// its exact_match column holds the accuracy fraction and its tanimoto column
// the mean similarity. Unreached edit distances are empty cells.
inline void write_reconstruction_csv(const ReconstructionReport& rep, std::ostream& os) {
  os << "input_smiles,output_smiles,exact_match,tanimoto,edit_distance\n";
  for (const ReconstructionRow& r : rep.rows) {
    os << r.input << ',' << r.output << ',' << (r.exact ? 1 : 0) << ','
       << detail::g9(r.tanimoto) << ',';
    if (r.edit_distance.has_value()) os << *r.edit_distance;
    os << '\n';
  }
  os << "summary,," << detail::g9(rep.accuracy) << ',' << detail::g9(rep.mean_tanimoto) << ",\n";
}

inline void write_reconstruction_csv(const ReconstructionReport& rep, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_reconstruction_csv(rep, os);
}

// -- Perturbation sweep -----------------------------------------------------

struct PerturbRow {
  int start_id = 0;  // index into the starting molecules
  double factor = 0.0;
  int repeat = 0;
  double cosine_distance = 0.0;
  double euclidean_distance = 0.0;
  double tanimoto = 0.0;  // sparse Morgan radius 3 vs the starting molecule
  std::string output;
};

struct PerturbOptions {
  int repeats = 100;
  int factors_per_side = 50;  // factors run +-0.1 .. +-(side * 0.1)
  int decode_batch = 200;
};

namespace detail {

inline double cosine_distance(const Tensor& a, const Tensor& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int c = 0; c < a.cols; ++c) {
    dot += static_cast<double>(a.at(0, c)) * b.at(0, c);
    na += static_cast<double>(a.at(0, c)) * a.at(0, c);
    nb += static_cast<double>(b.at(0, c)) * b.at(0, c);
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  if (denom == 0.0) return 0.0;
  return 1.0 - dot / denom;
}

inline double euclidean_distance(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (int c = 0; c < a.cols; ++c) {
    const double d = static_cast<double>(a.at(0, c)) - b.at(0, c);
    acc += d * d;
  }
  return std::sqrt(acc);
}

}  // namespace detail

// For every starting molecule: sample one embedding z from its posterior,
// then for each repeat draw one perturbation direction u uniform over
// [0, 1) per coordinate and decode z + factor * u for every scaling factor
// in [-5, 5] step 0.1 excluding 0. The direction is drawn once per repeat
// and shared across factors, so each repeat traces a line through the
// latent space. All draws happen upfront in (start, repeat) order and rows
// come back sorted by (start_id, factor, repeat), so neither ordering nor
// content depends on the decode batch size. Defaults give 10 starts x 100
// factors x 100 repeats = 100000 rows.
inline std::vector<PerturbRow> perturb_sweep(Model& m, const std::vector<MolGraph>& starts,
                                             std::uint64_t seed,
                                             const PerturbOptions& opt = {}) {
  MdpConfig cfg = MdpConfig::decoder();
  cfg.max_steps = m.horizon;
  const int side = opt.factors_per_side;

  Rng rng(seed);
  ValueFastPath fp(m);
  std::vector<PerturbRow> rows;
  rows.reserve(starts.size() * static_cast<std::size_t>(2 * side) *
               static_cast<std::size_t>(opt.repeats));

  for (std::size_t s = 0; s < starts.size(); ++s) {
    const Tensor z = target_distribution(m, starts[s]).sample(rng);
    std::vector<Tensor> dirs;
    dirs.reserve(static_cast<std::size_t>(opt.repeats));
    for (int r = 0; r < opt.repeats; ++r) {
      Tensor u(1, kLatentDim);
      for (int c = 0; c < kLatentDim; ++c) u.at(0, c) = static_cast<float>(rng.uniform());
      dirs.push_back(std::move(u));
    }
    const SparseFingerprint start_fp = morgan_fingerprint(starts[s], 3);

    // Factor index k runs -side..side skipping 0; ascending k gives rows
    // already sorted by factor.
    std::vector<Tensor> zs;
    std::vector<double> factors;
    zs.reserve(static_cast<std::size_t>(2 * side) * dirs.size());
    for (int k = -side; k <= side; ++k) {
      if (k == 0) continue;
      const double factor = static_cast<double>(k) / 10.0;
      for (int r = 0; r < opt.repeats; ++r) {
        Tensor zp = z;
        const Tensor& u = dirs[static_cast<std::size_t>(r)];
        for (int c = 0; c < kLatentDim; ++c) {
          zp.at(0, c) += static_cast<float>(factor) * u.at(0, c);
        }
        zs.push_back(std::move(zp));
        factors.push_back(factor);
      }
    }
    std::vector<const Tensor*> zptrs;
    zptrs.reserve(zs.size());
    for (const Tensor& t : zs) zptrs.push_back(&t);
    const std::vector<MolGraph> decoded =
        decode_latents_chunked(fp, zptrs, cfg, opt.decode_batch);

    for (std::size_t i = 0; i < decoded.size(); ++i) {
      PerturbRow row;
      row.start_id = static_cast<int>(s);
      row.factor = factors[i];
      row.repeat = static_cast<int>(i % static_cast<std::size_t>(opt.repeats));
      row.cosine_distance = detail::cosine_distance(z, zs[i]);
      row.euclidean_distance = detail::euclidean_distance(z, zs[i]);
      row.tanimoto = tanimoto(start_fp, morgan_fingerprint(decoded[i], 3));
      row.output = write_canonical_smiles(decoded[i]);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline void write_perturb_csv(const std::vector<PerturbRow>& rows, std::ostream& os) {
  os << "start_id,factor,repeat,cosine_distance,euclidean_distance,tanimoto_morgan_r3,"
        "output_smiles\n";
  for (const PerturbRow& r : rows) {
    os << r.start_id << ',' << detail::g9(r.factor) << ',' << r.repeat << ','
       << detail::g9(r.cosine_distance) << ',' << detail::g9(r.euclidean_distance) << ','
       << detail::g9(r.tanimoto) << ',' << r.output << '\n';
  }
}

inline void write_perturb_csv(const std::vector<PerturbRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_perturb_csv(rows, os);
}

// Bins rows into `bins` quantile buckets by cosine distance and returns the
// median Tanimoto per bucket, lowest distances first. Used to check that
// similarity decays as decodes move away from the start embedding.
inline std::vector<double> median_tanimoto_by_cosine(std::vector<PerturbRow> rows, int bins) {
  if (bins <= 0 || rows.empty()) throw std::invalid_argument("median_tanimoto_by_cosine");
  std::sort(rows.begin(), rows.end(), [](const PerturbRow& a, const PerturbRow& b) {
    return a.cosine_distance < b.cosine_distance;
  });
  std::vector<double> medians;
  medians.reserve(static_cast<std::size_t>(bins));
  const std::size_t n = rows.size();
  for (int b = 0; b < bins; ++b) {
    const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(bins);
    const std::size_t hi = n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(bins);
    if (lo == hi) {
      medians.push_back(medians.empty() ? 0.0 : medians.back());
      continue;
    }
    std::vector<double> t;
    t.reserve(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) t.push_back(rows[i].tanimoto);
    std::sort(t.begin(), t.end());
    const std::size_t k = t.size();
    medians.push_back(k % 2 == 1 ? t[k / 2] : 0.5 * (t[k / 2 - 1] + t[k / 2]));
  }
  return medians;
}

// -- Orthogonal-direction grid walk ------------------------------------------

struct ExploreRow {
  int i = 0;
  int j = 0;
  double coeff_a = 0.0;
  double coeff_b = 0.0;
  std::string smiles;
};

struct ExploreOptions {
  double extent = 20.0;  // grid spans [-extent, extent] per direction
  double step = 4.0;
  int decode_batch = 121;
};

// Two Gaussian draws orthonormalized by Gram-Schmidt. The second direction
// is the first draw's rejection from the second, so the pair spans the same
// plane the raw draws did.
inline std::pair<Tensor, Tensor> orthonormal_directions(Rng& rng) {
  Tensor d1 = standard_normal_row(rng, kLatentDim);
  Tensor d2 = standard_normal_row(rng, kLatentDim);
  double n1 = 0.0;
  for (int c = 0; c < kLatentDim; ++c) n1 += static_cast<double>(d1.at(0, c)) * d1.at(0, c);
  n1 = std::sqrt(n1);
  for (int c = 0; c < kLatentDim; ++c) d1.at(0, c) = static_cast<float>(d1.at(0, c) / n1);
  double dot = 0.0;
  for (int c = 0; c < kLatentDim; ++c) dot += static_cast<double>(d2.at(0, c)) * d1.at(0, c);
  for (int c = 0; c < kLatentDim; ++c) {
    d2.at(0, c) = static_cast<float>(d2.at(0, c) - dot * d1.at(0, c));
  }
  double n2 = 0.0;
  for (int c = 0; c < kLatentDim; ++c) n2 += static_cast<double>(d2.at(0, c)) * d2.at(0, c);
  n2 = std::sqrt(n2);
  for (int c = 0; c < kLatentDim; ++c) d2.at(0, c) = static_cast<float>(d2.at(0, c) / n2);
  return {std::move(d1), std::move(d2)};
}

// Two seeded Gaussian draws, orthonormalized by Gram-Schmidt, span a plane
// through the starting embedding; the grid decodes every lattice point.
// Defaults give an 11x11 grid at coefficients -20..20 step 4.
inline std::vector<ExploreRow> explore_grid(Model& m, const Tensor& start, std::uint64_t seed,
                                            const ExploreOptions& opt = {}) {
  MdpConfig cfg = MdpConfig::decoder();
  cfg.max_steps = m.horizon;

  Rng rng(seed);
  const auto [d1, d2] = orthonormal_directions(rng);

  const int per_side = static_cast<int>(std::llround(2.0 * opt.extent / opt.step)) + 1;
  std::vector<Tensor> zs;
  std::vector<ExploreRow> rows;
  zs.reserve(static_cast<std::size_t>(per_side) * static_cast<std::size_t>(per_side));
  for (int i = 0; i < per_side; ++i) {
    for (int j = 0; j < per_side; ++j) {
      const double a = -opt.extent + opt.step * i;
      const double b = -opt.extent + opt.step * j;
      Tensor z = start;
      for (int c = 0; c < kLatentDim; ++c) {
        z.at(0, c) += static_cast<float>(a * d1.at(0, c) + b * d2.at(0, c));
      }
      zs.push_back(std::move(z));
      ExploreRow row;
      row.i = i;
      row.j = j;
      row.coeff_a = a;
      row.coeff_b = b;
      rows.push_back(std::move(row));
    }
  }
  std::vector<const Tensor*> zptrs;
  zptrs.reserve(zs.size());
  for (const Tensor& t : zs) zptrs.push_back(&t);
  ValueFastPath fp(m);
  const std::vector<MolGraph> decoded = decode_latents_chunked(fp, zptrs, cfg, opt.decode_batch);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].smiles = write_canonical_smiles(decoded[k]);
  }
  return rows;
}

inline void write_explore_csv(const std::vector<ExploreRow>& rows, std::ostream& os) {
  os << "i,j,coeff_a,coeff_b,smiles\n";
  for (const ExploreRow& r : rows) {
    os << r.i << ',' << r.j << ',' << detail::g9(r.coeff_a) << ',' << detail::g9(r.coeff_b)
       << ',' << r.smiles << '\n';
  }
}

inline void write_explore_csv(const std::vector<ExploreRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_explore_csv(rows, os);
}

}  // namespace molrl

#endif  // MOLRL_EXPERIMENTS_EXPERIMENTS_HPP_
