//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Message-passing encoder over batches of molecular graphs. Graphs pack into
// one node/edge table so a whole batch runs through the same few matrix
// products; per-graph readouts come back as rows. Node features are one-hot
// element, edge features one-hot bond type, both mapped to 128 dimensions by
// bias-free linear layers. Two message rounds: the message into a node is
// the sum over incident edges of (neighbor state + edge embedding), with no
// learned transform on the message itself, and a shared GRU folds the
// aggregate into the node state. The readout gates a 256-wide linear map of
// each node state through a sigmoid and sums over the graph's nodes.
//
// Callers fix the node order before packing (the encoding entry points in
// model.hpp re-index graphs canonically), so every sum here runs in an order
// that depends only on the abstract graph and results are bit-reproducible.

#ifndef MOLRL_MODEL_ENCODER_HPP_
#define MOLRL_MODEL_ENCODER_HPP_

#include <algorithm>
#include <string>
#include <vector>

#include "molrl/chem/mol_graph.hpp"
#include "molrl/nn/layers.hpp"
#include "molrl/nn/tape.hpp"
#include "molrl/nn/tensor.hpp"

namespace molrl {

inline constexpr int kHiddenDim = 128;
inline constexpr int kLatentDim = 256;
inline constexpr int kAtomTypes = 5;  // H, C, N, O, F
inline constexpr int kBondTypes = 4;  // single, double, triple, aromatic
inline constexpr int kConvRounds = 2;

inline int atom_type_index(Element e) { return static_cast<int>(e); }
inline int bond_type_index(BondOrder o) { return static_cast<int>(o) - 1; }

// A list of graphs flattened into one node table and one directed-edge
// table. Each undirected bond contributes two directed edges; edges are
// grouped by destination node in ascending order, so aggregation visits a
// node's incoming messages in a fixed sequence. Empty graphs are allowed and
// simply contribute no rows, which leaves their readout at the zero vector.
struct GraphBatch {
  int num_graphs = 0;
  int num_nodes = 0;
  Tensor node_feat;             // [num_nodes, kAtomTypes]
  Tensor edge_feat;             // [num_edges, kBondTypes], directed
  std::vector<int> edge_src;    // batch node index the message comes from
  std::vector<int> edge_dst;    // batch node index the message goes to
  std::vector<int> node_graph;  // node -> graph id, ascending

  static GraphBatch pack(const std::vector<const MolGraph*>& graphs) {
    GraphBatch b;
    b.num_graphs = static_cast<int>(graphs.size());
    int edges = 0;
    for (const MolGraph* g : graphs) {
      b.num_nodes += g->num_atoms();
      edges += 2 * g->num_bonds();
    }
    b.node_feat = Tensor(b.num_nodes, kAtomTypes);
    b.edge_feat = Tensor(edges, kBondTypes);
    b.edge_src.reserve(edges);
    b.edge_dst.reserve(edges);
    b.node_graph.reserve(b.num_nodes);

    int node_off = 0;
    int e = 0;
    for (int gi = 0; gi < b.num_graphs; ++gi) {
      const MolGraph& g = *graphs[gi];
      for (int v = 0; v < g.num_atoms(); ++v) {
        b.node_feat.at(node_off + v, atom_type_index(g.atom(v).element)) = 1.0f;
        b.node_graph.push_back(gi);
      }
      for (int v = 0; v < g.num_atoms(); ++v) {
        std::vector<MolGraph::Adj> adj(g.neighbors(v).begin(), g.neighbors(v).end());
        std::sort(adj.begin(), adj.end(),
                  [](const MolGraph::Adj& x, const MolGraph::Adj& y) { return x.nbr < y.nbr; });
        for (const MolGraph::Adj& a : adj) {
          b.edge_feat.at(e, bond_type_index(g.bond(a.bond).order)) = 1.0f;
          b.edge_src.push_back(node_off + a.nbr);
          b.edge_dst.push_back(node_off + v);
          ++e;
        }
      }
      node_off += g.num_atoms();
    }
    return b;
  }

  static GraphBatch pack_one(const MolGraph& g) { return pack({&g}); }
};

// Gated readout: sum_v sigmoid(gate(h_v)) * body(h_v).
struct ReadoutP {
  LinearP gate;
  LinearP body;

  ReadoutP() = default;
  ReadoutP(int in, int out, Rng& rng) : gate(in, out, true, rng), body(in, out, true, rng) {}

  void collect(const std::string& prefix, ParamList& out) {
    gate.collect(prefix + ".gate", out);
    body.collect(prefix + ".body", out);
  }
};

// Shared trunk of both encoders: input embeddings plus the message-passing
// GRU. The readouts differ per encoder and live next to it.
struct EncoderP {
  LinearP node_in;  // [kAtomTypes, kHiddenDim], no bias
  LinearP edge_in;  // [kBondTypes, kHiddenDim], no bias
  GruP gru;

  EncoderP() = default;
  explicit EncoderP(Rng& rng)
      : node_in(kAtomTypes, kHiddenDim, false, rng),
        edge_in(kBondTypes, kHiddenDim, false, rng),
        gru(kHiddenDim, rng) {}

  void collect(const std::string& prefix, ParamList& out) {
    node_in.collect(prefix + ".node_in", out);
    edge_in.collect(prefix + ".edge_in", out);
    gru.collect(prefix + ".gru", out);
  }
};

// Final node states [num_nodes, kHiddenDim] after kConvRounds rounds.
inline int encode_nodes(Tape& tape, EncoderP& p, const GraphBatch& b) {
  int h = linear(tape, p.node_in, tape.constant(b.node_feat));
  const int e = linear(tape, p.edge_in, tape.constant(b.edge_feat));
  for (int round = 0; round < kConvRounds; ++round) {
    const int from = tape.gather_rows(h, b.edge_src);
    const int msg = tape.add(from, e);
    const int agg = tape.segment_sum(msg, b.edge_dst, b.num_nodes);
    h = gru_cell(tape, p.gru, h, agg);
  }
  return h;
}

// Per-graph readout [num_graphs, kLatentDim]; graphs with no nodes get the
// zero row.
inline int readout(Tape& tape, ReadoutP& p, int node_states, const GraphBatch& b) {
  const int gate = tape.sigmoid(linear(tape, p.gate, node_states));
  const int body = linear(tape, p.body, node_states);
  return tape.segment_sum(tape.mul(gate, body), b.node_graph, b.num_graphs);
}

struct StateEncoderP {
  EncoderP enc;
  ReadoutP read;

  StateEncoderP() = default;
  explicit StateEncoderP(Rng& rng) : enc(rng), read(kHiddenDim, kLatentDim, rng) {}

  void collect(const std::string& prefix, ParamList& out) {
    enc.collect(prefix, out);
    read.collect(prefix + ".read", out);
  }
};

struct TargetEncoderP {
  EncoderP enc;
  ReadoutP mu;
  ReadoutP log_sigma;

  TargetEncoderP() = default;
  explicit TargetEncoderP(Rng& rng)
      : enc(rng), mu(kHiddenDim, kLatentDim, rng), log_sigma(kHiddenDim, kLatentDim, rng) {}

  void collect(const std::string& prefix, ParamList& out) {
    enc.collect(prefix, out);
    mu.collect(prefix + ".mu", out);
    log_sigma.collect(prefix + ".log_sigma", out);
  }
};

inline int encode_states(Tape& tape, StateEncoderP& p, const GraphBatch& b) {
  return readout(tape, p.read, encode_nodes(tape, p.enc, b), b);
}

struct TargetHeads {
  int mu;         // [num_graphs, kLatentDim]
  int log_sigma;  // [num_graphs, kLatentDim], clamped to [-10, 10]
};

inline TargetHeads encode_targets(Tape& tape, TargetEncoderP& p, const GraphBatch& b) {
  const int h = encode_nodes(tape, p.enc, b);
  const int mu = readout(tape, p.mu, h, b);
  const int ls = tape.clamp(readout(tape, p.log_sigma, h, b), -10.0f, 10.0f);
  return {mu, ls};
}

}  // namespace molrl

#endif  // MOLRL_MODEL_ENCODER_HPP_
