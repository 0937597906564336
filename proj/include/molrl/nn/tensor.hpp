//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Row-major 2-D float tensors and the matrix kernels behind the autodiff
// tape. Every kernel writes each output row from exactly one loop iteration
// with a fixed inner accumulation order, so results are byte-identical for
// any thread count; threads only split rows between them.

#ifndef MOLRL_NN_TENSOR_HPP_
#define MOLRL_NN_TENSOR_HPP_

#include <Eigen/Core>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

#include "molrl/util/parallel.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0f) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }

  static Tensor full(int r, int c, float v) {
    Tensor t(r, c);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }

  // Row-major literal, e.g. Tensor::of(2, 3, {1,2,3,4,5,6}).
  static Tensor of(int r, int c, std::initializer_list<float> values) {
    Tensor t(r, c);
    assert(values.size() == t.data.size());
    std::copy(values.begin(), values.end(), t.data.begin());
    return t;
  }

  std::size_t size() const { return data.size(); }
  bool empty() const { return data.empty(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  float& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  float at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  float* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const float* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  Eigen::Map<Eigen::ArrayXf> row(int r) { return {row_ptr(r), cols}; }
  Eigen::Map<const Eigen::ArrayXf> row(int r) const { return {row_ptr(r), cols}; }
  Eigen::Map<Eigen::ArrayXf> flat() { return {data.data(), static_cast<Eigen::Index>(size())}; }
  Eigen::Map<const Eigen::ArrayXf> flat() const {
    return {data.data(), static_cast<Eigen::Index>(size())};
  }

  void fill(float v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (float v : data) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  // Uniform values in [-limit, limit), drawn row-major so the layout of the
  // tensor pins the stream order.
  void fill_uniform(Rng& rng, float limit) {
    for (float& v : data) v = limit * (2.0f * static_cast<float>(rng.uniform()) - 1.0f);
  }
};

namespace detail {

// C += A * B. Row i of C accumulates A(i,k) * B(k,:) for k ascending; rows
// are independent, so the row split across threads cannot change results.
inline void gemm_accumulate(const Tensor& a, const Tensor& b, Tensor& c) {
  assert(a.cols == b.rows && a.rows == c.rows && b.cols == c.cols);
  parallel_for(a.rows, [&](std::int64_t i) {
    auto out = c.row(static_cast<int>(i));
    const float* arow = a.row_ptr(static_cast<int>(i));
    for (int k = 0; k < a.cols; ++k) {
      const float w = arow[k];
      if (w != 0.0f) out += w * b.row(k);
    }
  });
}

// dA += dC * B^T, computed as row dots: dA(i,k) = dC(i,:) . B(k,:). The dot
// products accumulate scalar in ascending order (in 64-bit); a SIMD reduction
// would reassociate depending on buffer alignment.
inline void gemm_grad_left(const Tensor& dc, const Tensor& b, Tensor& da) {
  assert(da.rows == dc.rows && da.cols == b.rows && dc.cols == b.cols);
  parallel_for(da.rows, [&](std::int64_t i) {
    const float* g = dc.row_ptr(static_cast<int>(i));
    float* out = da.row_ptr(static_cast<int>(i));
    for (int k = 0; k < da.cols; ++k) {
      const float* brow = b.row_ptr(k);
      double acc = 0.0;
      for (int j = 0; j < dc.cols; ++j) acc += static_cast<double>(g[j]) * brow[j];
      out[k] += static_cast<float>(acc);
    }
  });
}

// dB += A^T * dC. Row k of dB accumulates A(i,k) * dC(i,:) for i ascending.
inline void gemm_grad_right(const Tensor& a, const Tensor& dc, Tensor& db) {
  assert(db.rows == a.cols && db.cols == dc.cols && a.rows == dc.rows);
  parallel_for(db.rows, [&](std::int64_t k) {
    auto out = db.row(static_cast<int>(k));
    for (int i = 0; i < a.rows; ++i) {
      const float w = a.at(i, static_cast<int>(k));
      if (w != 0.0f) out += w * dc.row(i);
    }
  });
}

}  // namespace detail

}  // namespace molrl

#endif  // MOLRL_NN_TENSOR_HPP_
