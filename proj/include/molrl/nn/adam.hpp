//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Adam with bias correction, bound to a fixed parameter list, plus the
// smooth exponential schedules used for the learning rate and the
// exploration rate: value(step) = base * rate^(step / interval).

#ifndef MOLRL_NN_ADAM_HPP_
#define MOLRL_NN_ADAM_HPP_

#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

#include "molrl/nn/layers.hpp"
#include "molrl/nn/tensor.hpp"

namespace molrl {

struct ExpSchedule {
  double base = 1.0;
  double rate = 1.0;
  double interval = 1.0;  // steps per rate application

  double at(std::int64_t step) const {
    return base * std::pow(rate, static_cast<double>(step) / interval);
  }
};

inline ExpSchedule default_lr_schedule() { return {1e-5, 0.99, 100000.0}; }
inline ExpSchedule default_eps_schedule() { return {1.0, 0.95, 10000.0}; }

class Adam {
 public:
  explicit Adam(const ParamList& params, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : params_(params), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const NamedParam& p : params_) {
      m_.emplace_back(p.tensor->rows, p.tensor->cols);
      v_.emplace_back(p.tensor->rows, p.tensor->cols);
    }
  }

  // grads[i] pairs with params[i]; an empty tensor means zero gradient.
  void step(const std::vector<Tensor>& grads, double lr) {
    assert(grads.size() == params_.size());
    ++t_;
    const float c1 = static_cast<float>(1.0 - std::pow(beta1_, t_));
    const float c2 = static_cast<float>(1.0 - std::pow(beta2_, t_));
    const float b1 = static_cast<float>(beta1_);
    const float b2 = static_cast<float>(beta2_);
    const float flr = static_cast<float>(lr);
    const float fe = static_cast<float>(eps_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor& p = *params_[i].tensor;
      Tensor& m = m_[i];
      Tensor& v = v_[i];
      if (grads[i].empty()) {
        // Moments still decay so an unused parameter behaves like one with a
        // zero gradient.
        m.flat() *= b1;
        v.flat() *= b2;
        const auto mh = m.flat() / c1;
        const auto vh = v.flat() / c2;
        p.flat() -= flr * mh / (vh.sqrt() + fe);
        continue;
      }
      assert(grads[i].same_shape(p));
      const auto g = grads[i].flat();
      m.flat() = b1 * m.flat() + (1.0f - b1) * g;
      v.flat() = b2 * v.flat() + (1.0f - b2) * g * g;
      const auto mh = m.flat() / c1;
      const auto vh = v.flat() / c2;
      p.flat() -= flr * mh / (vh.sqrt() + fe);
    }
  }

  std::int64_t step_count() const { return t_; }
  const ParamList& params() const { return params_; }

 private:
  ParamList params_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  double beta1_;
  double beta2_;
  double eps_;
  std::int64_t t_ = 0;
};

}  // namespace molrl

#endif  // MOLRL_NN_ADAM_HPP_
