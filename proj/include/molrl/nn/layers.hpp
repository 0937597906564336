//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Parameter structs for the layers the model uses, their seeded
// initialization, and tape-level forward helpers. Parameters register into a
// flat named list; that order is the optimizer's and the checkpoint's
// iteration order.

#ifndef MOLRL_NN_LAYERS_HPP_
#define MOLRL_NN_LAYERS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "molrl/nn/tape.hpp"
#include "molrl/nn/tensor.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

using ParamList = std::vector<NamedParam>;

// Fan-in/fan-out scaled uniform init; biases start at zero.
inline void init_uniform(Tensor& w, Rng& rng) {
  const float limit = std::sqrt(6.0f / static_cast<float>(w.rows + w.cols));
  w.fill_uniform(rng, limit);
}

struct LinearP {
  Tensor w;  // [in, out]
  Tensor b;  // [1, out]; empty when bias-free
  bool has_bias = true;

  LinearP() = default;
  LinearP(int in, int out, bool bias, Rng& rng) : w(in, out), has_bias(bias) {
    init_uniform(w, rng);
    if (bias) b = Tensor(1, out);
  }

  void collect(const std::string& prefix, ParamList& out) {
    out.push_back({prefix + ".w", &w});
    if (has_bias) out.push_back({prefix + ".b", &b});
  }
};

inline int linear(Tape& tape, LinearP& p, int x) {
  int y = tape.matmul(x, tape.param(&p.w));
  if (p.has_bias) y = tape.add_rowvec(y, tape.param(&p.b));
  return y;
}

// GRU cell over row-batched states. The input projection produces the
// update, reset, and candidate pre-activations in one [d, 3d] map; the
// hidden projection is split so the candidate path can see the reset-gated
// state: z = sig(xWz + hUz + bz), r = sig(xWr + hUr + br),
// c = tanh(xWc + (r*h)Uc + bc), h' = z*h + (1-z)*c.
struct GruP {
  int dim = 0;
  Tensor wx;     // [d, 3d] input -> (z, r, c)
  Tensor b;      // [1, 3d]
  Tensor wh_zr;  // [d, 2d] state -> (z, r)
  Tensor wh_c;   // [d, d]  reset-gated state -> candidate

  GruP() = default;
  GruP(int d, Rng& rng) : dim(d), wx(d, 3 * d), b(1, 3 * d), wh_zr(d, 2 * d), wh_c(d, d) {
    init_uniform(wx, rng);
    init_uniform(wh_zr, rng);
    init_uniform(wh_c, rng);
  }

  void collect(const std::string& prefix, ParamList& out) {
    out.push_back({prefix + ".wx", &wx});
    out.push_back({prefix + ".b", &b});
    out.push_back({prefix + ".wh_zr", &wh_zr});
    out.push_back({prefix + ".wh_c", &wh_c});
  }
};

// h, x: [n, d] -> [n, d]. With all parameters at zero this reduces to
// h' = 0.5 * h (update gate 0.5, candidate 0).
inline int gru_cell(Tape& tape, GruP& p, int h, int x) {
  const int d = p.dim;
  const int xs = tape.add_rowvec(tape.matmul(x, tape.param(&p.wx)), tape.param(&p.b));
  const int hs = tape.matmul(h, tape.param(&p.wh_zr));
  const int z = tape.sigmoid(tape.add(tape.slice_cols(xs, 0, d), tape.slice_cols(hs, 0, d)));
  const int r =
      tape.sigmoid(tape.add(tape.slice_cols(xs, d, 2 * d), tape.slice_cols(hs, d, 2 * d)));
  const int c = tape.tanh(
      tape.add(tape.slice_cols(xs, 2 * d, 3 * d), tape.matmul(tape.mul(r, h), tape.param(&p.wh_c))));
  return tape.add(tape.mul(z, h), tape.mul(tape.affine(z, -1.0f, 1.0f), c));
}

}  // namespace molrl

#endif  // MOLRL_NN_LAYERS_HPP_
