//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Finite-difference verification of reverse-mode gradients. The objective is
// re-evaluated with single coordinates nudged by a sweep of step sizes; the
// best central-difference estimate per coordinate is compared against the
// analytic gradient. Forward passes run in f32, so step sizes well above the
// f32 ulp are probed and the minimum error over the sweep is kept.

#ifndef MOLRL_NN_GRAD_CHECK_HPP_
#define MOLRL_NN_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "molrl/nn/tensor.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

// Evaluates the scalar objective at the current parameter values. When
// `grads` is non-null the function must also fill one gradient tensor per
// parameter, shaped like the parameter, in parameter order.
using GradFn = std::function<double(std::vector<Tensor>* grads)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  int probed = 0;   // coordinates compared
  int skipped = 0;  // coordinates with negligible gradient on both sides
  // Worst coordinate, for diagnostics.
  int worst_param = -1;
  int worst_coord = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  bool within(double tolerance) const { return probed > 0 && max_rel_err <= tolerance; }
};

// Central differences at each probed coordinate with a step-size sweep;
// coordinates are drawn uniformly per parameter. A coordinate is compared
// only when the analytic or the numeric derivative reaches `rel_floor` times
// the largest analytic-gradient magnitude: below that, an f32 forward pass
// leaves the difference quotient noise-dominated and a relative error says
// nothing. Skips are counted, and a disagreement between a large numeric and
// a tiny analytic value still gets flagged because either side can clear the
// floor.
inline GradCheckReport grad_check(const GradFn& f, const std::vector<Tensor*>& params,
                                  int probes_per_param, Rng& rng,
                                  double rel_floor = 1e-2) {
  std::vector<Tensor> analytic;
  f(&analytic);

  double max_abs = 0.0;
  for (const Tensor& g : analytic) {
    for (float v : g.data) max_abs = std::max(max_abs, static_cast<double>(std::fabs(v)));
  }
  const double floor = rel_floor * max_abs + 1e-12;

  static constexpr double kSteps[] = {0.03, 0.01, 0.003, 0.001};
  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor& theta = *params[pi];
    const int n = static_cast<int>(theta.size());
    const int probes = std::min(probes_per_param, n);
    for (int k = 0; k < probes; ++k) {
      // Sample without replacement when probing everything; uniform otherwise.
      const int c = probes == n ? k : static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      const double ana = analytic[pi].data[c];
      const float saved = theta.data[c];
      double best_err = -1.0;
      double best_num = 0.0;
      bool comparable = std::fabs(ana) >= floor;
      for (double h : kSteps) {
        theta.data[c] = static_cast<float>(saved + h);
        const double fp = f(nullptr);
        theta.data[c] = static_cast<float>(saved - h);
        const double fm = f(nullptr);
        const double num = (fp - fm) / (2.0 * h);
        comparable = comparable || std::fabs(num) >= floor;
        const double denom = std::max(std::fabs(num) + std::fabs(ana), 1e-12);
        const double err = std::fabs(num - ana) / denom;
        if (best_err < 0.0 || err < best_err) {
          best_err = err;
          best_num = num;
        }
      }
      theta.data[c] = saved;
      if (!comparable) {
        ++report.skipped;
        continue;
      }
      ++report.probed;
      if (best_err > report.max_rel_err) {
        report.max_rel_err = best_err;
        report.worst_param = static_cast<int>(pi);
        report.worst_coord = c;
        report.worst_analytic = ana;
        report.worst_numeric = best_num;
      }
    }
  }
  return report;
}

}  // namespace molrl

#endif  // MOLRL_NN_GRAD_CHECK_HPP_
