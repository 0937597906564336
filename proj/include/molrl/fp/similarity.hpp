//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLRL_FP_SIMILARITY_HPP_
#define MOLRL_FP_SIMILARITY_HPP_

#include <algorithm>
#include <array>
#include <utility>
#include <vector>

#include "molrl/chem/mol_graph.hpp"
#include "molrl/fp/fingerprint.hpp"

namespace molrl {

struct SimilarityConfig {
  std::vector<std::pair<double, double>> tversky_pairs = {{0.5, 0.5}, {0.95, 0.05}, {0.05, 0.95}};
  int morgan_radius = 3;
  int path_max_len = 7;
};

// Multiset Tversky index with truncated-difference semantics. Two empty
// fingerprints are identical molecules by convention: 1.0.
inline double tversky(const SparseFingerprint& a, const SparseFingerprint& b, double alpha,
                      double beta) {
  const double inter = static_cast<double>(intersection_size(a, b));
  const double only_a = static_cast<double>(a.total()) - inter;
  const double only_b = static_cast<double>(b.total()) - inter;
  const double denom = inter + alpha * only_a + beta * only_b;
  if (denom == 0.0) return 1.0;
  return inter / denom;
}

inline double tanimoto(const SparseFingerprint& a, const SparseFingerprint& b) {
  return tversky(a, b, 1.0, 1.0);
}

inline double dice(const SparseFingerprint& a, const SparseFingerprint& b) {
  return tversky(a, b, 0.5, 0.5);
}

// Tanimoto over element counts, implicit and explicit hydrogens included.
inline double atom_count_similarity(const MolGraph& a, const MolGraph& b) {
  const std::array<int, kNumElements> ca = a.element_counts();
  const std::array<int, kNumElements> cb = b.element_counts();
  long long lo = 0, hi = 0;
  for (int i = 0; i < kNumElements; ++i) {
    lo += std::min(ca[i], cb[i]);
    hi += std::max(ca[i], cb[i]);
  }
  if (hi == 0) return 1.0;  // both graphs empty
  return static_cast<double>(lo) / static_cast<double>(hi);
}

// The three structural fingerprints of one molecule, computed once so
// comparisons against a fixed target do not recompute its side.
struct FingerprintSet {
  SparseFingerprint morgan;
  SparseFingerprint path;
  SparseFingerprint pair;

  static FingerprintSet of(const MolGraph& g, const SimilarityConfig& cfg) {
    return {morgan_fingerprint(g, cfg.morgan_radius), path_fingerprint(g, cfg.path_max_len),
            atom_pair_fingerprint(g)};
  }
};

struct SimilarityBreakdown {
  double morgan = 0;
  double path = 0;
  double pair = 0;
  double atom_count = 0;

  double mean() const { return (morgan + path + pair + atom_count) / 4.0; }
};

inline double mean_tversky(const SparseFingerprint& a, const SparseFingerprint& b,
                           const SimilarityConfig& cfg) {
  double s = 0;
  for (const auto& [alpha, beta] : cfg.tversky_pairs) s += tversky(a, b, alpha, beta);
  return s / static_cast<double>(cfg.tversky_pairs.size());
}

inline SimilarityBreakdown similarity_breakdown(const MolGraph& a, const FingerprintSet& fa,
                                                const MolGraph& b, const FingerprintSet& fb,
                                                const SimilarityConfig& cfg) {
  SimilarityBreakdown out;
  out.morgan = mean_tversky(fa.morgan, fb.morgan, cfg);
  out.path = mean_tversky(fa.path, fb.path, cfg);
  out.pair = mean_tversky(fa.pair, fb.pair, cfg);
  out.atom_count = atom_count_similarity(a, b);
  return out;
}

// Precomputed target side of the reward.
class RewardContext {
 public:
  explicit RewardContext(MolGraph target, SimilarityConfig cfg = {})
      : target_(std::move(target)),
        cfg_(std::move(cfg)),
        target_fps_(FingerprintSet::of(target_, cfg_)) {}

  const MolGraph& target() const { return target_; }
  const SimilarityConfig& config() const { return cfg_; }

  SimilarityBreakdown breakdown(const MolGraph& s) const {
    return similarity_breakdown(s, FingerprintSet::of(s, cfg_), target_, target_fps_, cfg_);
  }

  // Mean of the three fingerprint similarities (each itself a mean over the
  // configured Tversky pairs) and the atom-count similarity.
  double reward(const MolGraph& s) const { return breakdown(s).mean(); }

 private:
  MolGraph target_;
  SimilarityConfig cfg_;
  FingerprintSet target_fps_;
};

inline double reward(const MolGraph& s, const MolGraph& y, const SimilarityConfig& cfg = {}) {
  return RewardContext(y, cfg).reward(s);
}

}  // namespace molrl

#endif  // MOLRL_FP_SIMILARITY_HPP_
