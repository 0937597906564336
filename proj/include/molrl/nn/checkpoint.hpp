//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Self-describing binary checkpoint: magic, format version, generator state,
// step counter, then (name, shape, f32 payload) entries sorted by name.
// Round trips are bit-exact. Little-endian layout, written and read through
// fixed-width scalars.

#ifndef MOLRL_NN_CHECKPOINT_HPP_
#define MOLRL_NN_CHECKPOINT_HPP_

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "molrl/nn/layers.hpp"
#include "molrl/nn/tensor.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

struct Checkpoint {
  std::uint32_t version = 1;
  std::array<std::uint64_t, 4> rng_state = {0, 0, 0, 0};
  std::uint64_t step = 0;
  std::map<std::string, Tensor> tensors;  // name-sorted by construction

  void put(const ParamList& params) {
    for (const NamedParam& p : params) tensors[p.name] = *p.tensor;
  }

  // Copies stored tensors back into the parameter list; throws on a missing
  // name or a shape mismatch.
  void restore(const ParamList& params) const {
    for (const NamedParam& p : params) {
      auto it = tensors.find(p.name);
      if (it == tensors.end()) {
        throw std::runtime_error("checkpoint: missing tensor " + p.name);
      }
      if (!it->second.same_shape(*p.tensor)) {
        throw std::runtime_error("checkpoint: shape mismatch for " + p.name);
      }
      *p.tensor = it->second;
    }
  }
};

namespace detail {

constexpr char kCkptMagic[8] = {'M', 'O', 'L', 'R', 'L', 'C', 'K', '1'};

template <typename T>
void write_scalar(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_scalar(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  os.write(detail::kCkptMagic, sizeof(detail::kCkptMagic));
  detail::write_scalar(os, ck.version);
  for (std::uint64_t w : ck.rng_state) detail::write_scalar(os, w);
  detail::write_scalar(os, ck.step);
  detail::write_scalar(os, static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& [name, t] : ck.tensors) {
    detail::write_scalar(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_scalar(os, static_cast<std::uint32_t>(t.rows));
    detail::write_scalar(os, static_cast<std::uint32_t>(t.cols));
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.size() * sizeof(float)));
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, detail::kCkptMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic in " + path);
  }
  Checkpoint ck;
  ck.version = detail::read_scalar<std::uint32_t>(is);
  if (ck.version != 1) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(ck.version));
  }
  for (std::uint64_t& w : ck.rng_state) w = detail::read_scalar<std::uint64_t>(is);
  ck.step = detail::read_scalar<std::uint64_t>(is);
  const std::uint32_t count = detail::read_scalar<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = detail::read_scalar<std::uint32_t>(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const std::uint32_t rows = detail::read_scalar<std::uint32_t>(is);
    const std::uint32_t cols = detail::read_scalar<std::uint32_t>(is);
    Tensor t(static_cast<int>(rows), static_cast<int>(cols));
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!is) throw std::runtime_error("checkpoint: truncated tensor " + name);
    ck.tensors.emplace(std::move(name), std::move(t));
  }
  return ck;
}

}  // namespace molrl

#endif  // MOLRL_NN_CHECKPOINT_HPP_
