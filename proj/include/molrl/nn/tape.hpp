//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Reverse-mode autodiff over a per-batch tape. The graph is built by value:
// each operation appends a node holding its result, and backward() walks the
// nodes in reverse creation order, accumulating gradients into the inputs.
// Parameters are leaves that reference external storage; asking the same
// Tape for the same parameter twice returns the same node, so weight sharing
// (e.g. one GRU used for every message-passing round) accumulates naturally.
//
// The op set is exactly what the encoder, value head, and loss need. All
// reductions run in a fixed order (and in 64-bit where sums get long), so a
// training step is bit-reproducible.

#ifndef MOLRL_NN_TAPE_HPP_
#define MOLRL_NN_TAPE_HPP_

#include <cassert>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "molrl/nn/tensor.hpp"

namespace molrl {

enum class Op : std::uint8_t {
  Param,
  Constant,
  MatMul,
  Add,
  AddRowVec,
  Sub,
  Mul,
  Affine,  // k * x + c elementwise
  Sigmoid,
  Tanh,
  Relu,
  Softplus,
  Exp,
  Clamp,
  Huber,
  SliceCols,
  ConcatCols,
  GatherRows,
  SegmentSum,
  Sum,  // all elements -> [1,1]
};

class Tape {
 public:
  struct Node {
    Op op = Op::Constant;
    int a = -1;
    int b = -1;
    std::vector<int> list;  // ConcatCols inputs
    std::vector<int> idx;   // GatherRows row indices / SegmentSum segment ids
    float f0 = 0.0f;        // Affine k / Clamp lo / Huber delta
    float f1 = 0.0f;        // Affine c / Clamp hi
    int i0 = 0;             // SliceCols begin / SegmentSum segment count
    int i1 = 0;             // SliceCols end
    Tensor val;
    Tensor grad;  // allocated on first contribution during backward
    bool needs_grad = false;
    Tensor* external = nullptr;  // Param storage
  };

  int param(Tensor* p) {
    auto it = param_ids_.find(p);
    if (it != param_ids_.end()) return it->second;
    Node n;
    n.op = Op::Param;
    n.val = *p;
    n.needs_grad = true;
    n.external = p;
    const int id = push(std::move(n));
    param_ids_.emplace(p, id);
    return id;
  }

  int constant(Tensor v) {
    Node n;
    n.op = Op::Constant;
    n.val = std::move(v);
    return push(std::move(n));
  }

  int matmul(int a, int b) {
    assert(val(a).cols == val(b).rows);
    Node n = binary(Op::MatMul, a, b);
    n.val = Tensor(val(a).rows, val(b).cols);
    detail::gemm_accumulate(val(a), val(b), n.val);
    return push(std::move(n));
  }

  int add(int a, int b) {
    assert(val(a).same_shape(val(b)));
    Node n = binary(Op::Add, a, b);
    n.val = val(a);
    n.val.flat() += val(b).flat();
    return push(std::move(n));
  }

  // x [m,n] + row [1,n], broadcast over rows.
  int add_rowvec(int a, int b) {
    assert(val(b).rows == 1 && val(a).cols == val(b).cols);
    Node n = binary(Op::AddRowVec, a, b);
    n.val = val(a);
    for (int r = 0; r < n.val.rows; ++r) n.val.row(r) += val(b).row(0);
    return push(std::move(n));
  }

  int sub(int a, int b) {
    assert(val(a).same_shape(val(b)));
    Node n = binary(Op::Sub, a, b);
    n.val = val(a);
    n.val.flat() -= val(b).flat();
    return push(std::move(n));
  }

  int mul(int a, int b) {
    assert(val(a).same_shape(val(b)));
    Node n = binary(Op::Mul, a, b);
    n.val = val(a);
    n.val.flat() *= val(b).flat();
    return push(std::move(n));
  }

  int affine(int a, float k, float c) {
    Node n = unary(Op::Affine, a);
    n.f0 = k;
    n.f1 = c;
    n.val = val(a);
    n.val.flat() = k * n.val.flat() + c;
    return push(std::move(n));
  }

  // Transcendentals run through scalar libm calls on purpose: Eigen's SIMD
  // versions peel leading elements depending on runtime buffer alignment,
  // and the scalar and packet code paths differ in the last ulp, which would
  // make results depend on heap addresses.
  int sigmoid(int a) {
    Node n = unary(Op::Sigmoid, a);
    n.val = val(a);
    for (float& v : n.val.data) v = 1.0f / (1.0f + std::exp(-v));
    return push(std::move(n));
  }

  int tanh(int a) {
    Node n = unary(Op::Tanh, a);
    n.val = val(a);
    for (float& v : n.val.data) v = std::tanh(v);
    return push(std::move(n));
  }

  int relu(int a) {
    Node n = unary(Op::Relu, a);
    n.val = val(a);
    n.val.flat() = n.val.flat().max(0.0f);
    return push(std::move(n));
  }

  // log(1 + e^x), evaluated as max(x, 0) + log1p(e^{-|x|}) to stay finite for
  // large |x|.
  int softplus(int a) {
    Node n = unary(Op::Softplus, a);
    n.val = val(a);
    for (float& v : n.val.data) {
      v = std::max(v, 0.0f) + std::log1p(std::exp(-std::fabs(v)));
    }
    return push(std::move(n));
  }

  int exp(int a) {
    Node n = unary(Op::Exp, a);
    n.val = val(a);
    for (float& v : n.val.data) v = std::exp(v);
    return push(std::move(n));
  }

  int clamp(int a, float lo, float hi) {
    Node n = unary(Op::Clamp, a);
    n.f0 = lo;
    n.f1 = hi;
    n.val = val(a);
    n.val.flat() = n.val.flat().min(hi).max(lo);
    return push(std::move(n));
  }

  // Elementwise Huber: 0.5 x^2 inside |x| <= delta, delta (|x| - 0.5 delta)
  // outside.
  int huber(int a, float delta) {
    Node n = unary(Op::Huber, a);
    n.f0 = delta;
    n.val = val(a);
    for (float& v : n.val.data) {
      const float ax = std::fabs(v);
      v = ax <= delta ? 0.5f * v * v : delta * (ax - 0.5f * delta);
    }
    return push(std::move(n));
  }

  // Columns [c0, c1) of a.
  int slice_cols(int a, int c0, int c1) {
    assert(0 <= c0 && c0 < c1 && c1 <= val(a).cols);
    Node n = unary(Op::SliceCols, a);
    n.i0 = c0;
    n.i1 = c1;
    n.val = Tensor(val(a).rows, c1 - c0);
    for (int r = 0; r < n.val.rows; ++r) {
      const float* src = val(a).row_ptr(r);
      float* dst = n.val.row_ptr(r);
      for (int c = c0; c < c1; ++c) dst[c - c0] = src[c];
    }
    return push(std::move(n));
  }

  int concat_cols(const std::vector<int>& parts) {
    assert(!parts.empty());
    int cols = 0;
    for (int p : parts) {
      assert(val(p).rows == val(parts[0]).rows);
      cols += val(p).cols;
    }
    Node n;
    n.op = Op::ConcatCols;
    n.list = parts;
    for (int p : parts) n.needs_grad = n.needs_grad || node(p).needs_grad;
    n.val = Tensor(val(parts[0]).rows, cols);
    for (int r = 0; r < n.val.rows; ++r) {
      float* dst = n.val.row_ptr(r);
      for (int p : parts) {
        const float* src = val(p).row_ptr(r);
        dst = std::copy(src, src + val(p).cols, dst);
      }
    }
    return push(std::move(n));
  }

  // out[i,:] = a[idx[i],:].
  int gather_rows(int a, std::vector<int> idx) {
    Node n = unary(Op::GatherRows, a);
    n.val = Tensor(static_cast<int>(idx.size()), val(a).cols);
    for (int i = 0; i < n.val.rows; ++i) {
      assert(idx[i] >= 0 && idx[i] < val(a).rows);
      n.val.row(i) = val(a).row(idx[i]);
    }
    n.idx = std::move(idx);
    return push(std::move(n));
  }

  // out[seg[i],:] += a[i,:], rows visited in ascending order. `segments` is
  // the number of output rows; empty segments stay zero.
  int segment_sum(int a, std::vector<int> seg, int segments) {
    assert(static_cast<int>(seg.size()) == val(a).rows);
    Node n = unary(Op::SegmentSum, a);
    n.i0 = segments;
    n.val = Tensor(segments, val(a).cols);
    for (int i = 0; i < val(a).rows; ++i) {
      assert(seg[i] >= 0 && seg[i] < segments);
      n.val.row(seg[i]) += val(a).row(i);
    }
    n.idx = std::move(seg);
    return push(std::move(n));
  }

  // Sum of all elements, accumulated in 64-bit.
  int sum(int a) {
    Node n = unary(Op::Sum, a);
    double acc = 0.0;
    for (float v : val(a).data) acc += v;
    n.val = Tensor::of(1, 1, {static_cast<float>(acc)});
    return push(std::move(n));
  }

  const Tensor& val(int id) const { return nodes_[id].val; }
  const Node& node(int id) const { return nodes_[id]; }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Gradient from the most recent backward() w.r.t. node `id`; empty if the
  // node was not reached.
  const Tensor& grad(int id) const { return nodes_[id].grad; }

  // Gradient w.r.t. a parameter tensor registered via param(); empty if the
  // parameter never joined this tape or was not reached by backward().
  const Tensor& param_grad(const Tensor* p) const {
    static const Tensor kEmpty;
    auto it = param_ids_.find(p);
    return it == param_ids_.end() ? kEmpty : nodes_[it->second].grad;
  }

  // Reverse sweep from a scalar output node.
  void backward(int output) {
    assert(val(output).rows == 1 && val(output).cols == 1);
    for (Node& n : nodes_) n.grad = Tensor();
    touch(output).at(0, 0) = 1.0f;
    for (int id = output; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.needs_grad || n.grad.empty()) continue;
      accumulate_inputs(id, n);
    }
  }

 private:
  Node binary(Op op, int a, int b) {
    Node n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
    return n;
  }

  Node unary(Op op, int a) {
    Node n;
    n.op = op;
    n.a = a;
    n.needs_grad = nodes_[a].needs_grad;
    return n;
  }

  int push(Node n) {
    assert(n.val.all_finite());
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  Tensor& touch(int id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Tensor(n.val.rows, n.val.cols);
    return n.grad;
  }

  // Adds this node's contribution to its inputs' gradients.
  void accumulate_inputs(int id, Node& n) {
    const Tensor& g = n.grad;
    auto want = [&](int in) { return in >= 0 && nodes_[in].needs_grad; };
    switch (n.op) {
      case Op::Param:
      case Op::Constant:
        break;
      case Op::MatMul:
        if (want(n.a)) detail::gemm_grad_left(g, nodes_[n.b].val, touch(n.a));
        if (want(n.b)) detail::gemm_grad_right(nodes_[n.a].val, g, touch(n.b));
        break;
      case Op::Add:
        if (want(n.a)) touch(n.a).flat() += g.flat();
        if (want(n.b)) touch(n.b).flat() += g.flat();
        break;
      case Op::AddRowVec:
        if (want(n.a)) touch(n.a).flat() += g.flat();
        if (want(n.b)) {
          Tensor& db = touch(n.b);
          for (int c = 0; c < g.cols; ++c) {
            double acc = 0.0;
            for (int r = 0; r < g.rows; ++r) acc += g.at(r, c);
            db.at(0, c) += static_cast<float>(acc);
          }
        }
        break;
      case Op::Sub:
        if (want(n.a)) touch(n.a).flat() += g.flat();
        if (want(n.b)) touch(n.b).flat() -= g.flat();
        break;
      case Op::Mul:
        if (want(n.a)) touch(n.a).flat() += g.flat() * nodes_[n.b].val.flat();
        if (want(n.b)) touch(n.b).flat() += g.flat() * nodes_[n.a].val.flat();
        break;
      case Op::Affine:
        if (want(n.a)) touch(n.a).flat() += n.f0 * g.flat();
        break;
      case Op::Sigmoid:
        if (want(n.a)) touch(n.a).flat() += g.flat() * n.val.flat() * (1.0f - n.val.flat());
        break;
      case Op::Tanh:
        if (want(n.a)) touch(n.a).flat() += g.flat() * (1.0f - n.val.flat() * n.val.flat());
        break;
      case Op::Relu:
        if (want(n.a)) {
          touch(n.a).flat() += g.flat() * (nodes_[n.a].val.flat() > 0.0f).cast<float>();
        }
        break;
      case Op::Softplus:
        if (want(n.a)) {
          Tensor& da = touch(n.a);
          const Tensor& x = nodes_[n.a].val;
          for (std::size_t i = 0; i < x.size(); ++i) {
            da.data[i] += g.data[i] / (1.0f + std::exp(-x.data[i]));
          }
        }
        break;
      case Op::Exp:
        if (want(n.a)) touch(n.a).flat() += g.flat() * n.val.flat();
        break;
      case Op::Clamp:
        if (want(n.a)) {
          const auto x = nodes_[n.a].val.flat();
          touch(n.a).flat() += g.flat() * ((x > n.f0) && (x < n.f1)).cast<float>();
        }
        break;
      case Op::Huber:
        if (want(n.a)) {
          Tensor& da = touch(n.a);
          const Tensor& x = nodes_[n.a].val;
          for (std::size_t i = 0; i < x.size(); ++i) {
            const float v = x.data[i];
            const float d =
                std::fabs(v) <= n.f0 ? v : (v > 0.0f ? n.f0 : -n.f0);
            da.data[i] += g.data[i] * d;
          }
        }
        break;
      case Op::SliceCols:
        if (want(n.a)) {
          Tensor& da = touch(n.a);
          for (int r = 0; r < g.rows; ++r) {
            for (int c = 0; c < g.cols; ++c) da.at(r, n.i0 + c) += g.at(r, c);
          }
        }
        break;
      case Op::ConcatCols: {
        int off = 0;
        for (int p : n.list) {
          const int w = nodes_[p].val.cols;
          if (want(p)) {
            Tensor& dp = touch(p);
            for (int r = 0; r < g.rows; ++r) {
              for (int c = 0; c < w; ++c) dp.at(r, c) += g.at(r, off + c);
            }
          }
          off += w;
        }
        break;
      }
      case Op::GatherRows:
        if (want(n.a)) {
          Tensor& da = touch(n.a);
          for (int i = 0; i < g.rows; ++i) da.row(n.idx[i]) += g.row(i);
        }
        break;
      case Op::SegmentSum:
        if (want(n.a)) {
          Tensor& da = touch(n.a);
          for (int i = 0; i < da.rows; ++i) da.row(i) += g.row(n.idx[i]);
        }
        break;
      case Op::Sum:
        if (want(n.a)) touch(n.a).flat() += g.at(0, 0);
        break;
    }
    (void)id;
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, int> param_ids_;
};

}  // namespace molrl

#endif  // MOLRL_NN_TAPE_HPP_
