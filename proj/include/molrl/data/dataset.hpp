//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

// Dataset ingestion: a SMILES list (plain or "id,smiles" CSV with header) is
// filtered, canonicalized, deduplicated, and split into ten folds by a seeded
// shuffle. Folds 0-7 train, fold 8 tunes, fold 9 tests. Molecules carrying
// formal charges are dropped up front and counted separately from parse
// failures, mirroring the charge filter applied to the reference corpus.

#ifndef MOLRL_DATA_DATASET_HPP_
#define MOLRL_DATA_DATASET_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "molrl/chem/canonical.hpp"
#include "molrl/chem/smiles.hpp"
#include "molrl/util/rng.hpp"

namespace molrl {

enum class SplitRole { Train, Tune, Test };

inline SplitRole role_of_fold(int fold) {
  if (fold < 0 || fold > 9) throw std::out_of_range("role_of_fold: fold outside 0..9");
  if (fold <= 7) return SplitRole::Train;
  return fold == 8 ? SplitRole::Tune : SplitRole::Test;
}

inline const char* role_name(SplitRole role) {
  switch (role) {
    case SplitRole::Train: return "train";
    case SplitRole::Tune: return "tune";
    default: return "test";
  }
}

struct DataRecord {
  std::string id;
  std::string raw;        // line as ingested
  std::string canonical;  // canonical SMILES, unique across the dataset
  int fold = -1;
};

struct DropCounts {
  int charge = 0;       // formal charge token inside a bracket atom
  int parse_error = 0;  // rejected by the SMILES parser
  int heavy_atoms = 0;  // over the configured heavy-atom cap
  int duplicate = 0;    // canonical form already seen (first occurrence kept)

  int total() const { return charge + parse_error + heavy_atoms + duplicate; }
};

struct IngestOptions {
  int max_heavy_atoms = 0;  // 0 = unlimited
  std::size_t limit = 0;    // 0 = unlimited; stop after this many survivors
};

struct Dataset {
  std::vector<DataRecord> records;  // input order, deduplicated
  DropCounts drops;
  std::uint64_t seed = 0;

  std::vector<const DataRecord*> fold_members(int fold) const {
    std::vector<const DataRecord*> out;
    for (const DataRecord& r : records)
      if (r.fold == fold) out.push_back(&r);
    return out;
  }

  std::vector<const DataRecord*> split(SplitRole role) const {
    std::vector<const DataRecord*> out;
    for (const DataRecord& r : records)
      if (role_of_fold(r.fold) == role) out.push_back(&r);
    return out;
  }
};

namespace detail {

// A formal charge shows up only as '+' or '-' inside a bracket atom; outside
// brackets '-' is the explicit single-bond symbol and stays legal.
inline bool has_charge_token(const std::string& s) {
  bool in_bracket = false;
  for (char c : s) {
    if (c == '[') in_bracket = true;
    else if (c == ']') in_bracket = false;
    else if (in_bracket && (c == '+' || c == '-')) return true;
  }
  return false;
}

inline int heavy_atom_count(const MolGraph& g) {
  int n = 0;
  for (int v = 0; v < g.num_atoms(); ++v) n += g.atom(v).element != Element::H ? 1 : 0;
  return n;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace detail

// Core ingestion over already-split lines. The first line may be an
// "id,smiles" CSV header; otherwise every non-empty line is one SMILES and
// ids are 1-based line ordinals.
inline Dataset ingest_lines(const std::vector<std::string>& lines, std::uint64_t seed,
                            const IngestOptions& opt = {}) {
  Dataset ds;
  ds.seed = seed;

  std::size_t start = 0;
  bool csv = false;
  if (!lines.empty()) {
    const std::string head = detail::lower(detail::trim(lines[0]));
    if (head.find(',') != std::string::npos && head.find("smiles") != std::string::npos) {
      csv = true;
      start = 1;
    }
  }

  std::unordered_set<std::string> seen;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (opt.limit > 0 && ds.records.size() >= opt.limit) break;
    const std::string line = detail::trim(lines[i]);
    if (line.empty()) continue;

    DataRecord rec;
    if (csv) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        ++ds.drops.parse_error;
        continue;
      }
      rec.id = detail::trim(line.substr(0, comma));
      rec.raw = detail::trim(line.substr(comma + 1));
    } else {
      rec.id = std::to_string(i + 1);
      rec.raw = line;
    }

    if (detail::has_charge_token(rec.raw)) {
      ++ds.drops.charge;
      continue;
    }
    MolGraph g;
    try {
      g = parse_smiles(rec.raw);
    } catch (const std::exception&) {
      ++ds.drops.parse_error;
      continue;
    }
    if (g.empty()) {
      ++ds.drops.parse_error;
      continue;
    }
    if (opt.max_heavy_atoms > 0 && detail::heavy_atom_count(g) > opt.max_heavy_atoms) {
      ++ds.drops.heavy_atoms;
      continue;
    }
    rec.canonical = write_canonical_smiles(g);
    if (!seen.insert(rec.canonical).second) {
      ++ds.drops.duplicate;
      continue;
    }
    ds.records.push_back(std::move(rec));
  }

  if (ds.records.empty()) throw std::runtime_error("ingest: no usable molecules in input");

  // Seeded shuffle, then position modulo 10: fold sizes differ by at most one
  // and the same seed always reproduces the same assignment.
  std::vector<int> order(ds.records.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    ds.records[order[pos]].fold = static_cast<int>(pos % 10);
  }
  return ds;
}

inline Dataset ingest_file(const std::string& path, std::uint64_t seed,
                           const IngestOptions& opt = {}) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("ingest: cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return ingest_lines(lines, seed, opt);
}

// Manifest CSV: one row per record, in dataset order.
inline void write_manifest(const Dataset& ds, std::ostream& os) {
  os << "id,canonical_smiles,fold,role\n";
  for (const DataRecord& r : ds.records) {
    os << r.id << ',' << r.canonical << ',' << r.fold << ',' << role_name(role_of_fold(r.fold))
       << '\n';
  }
}

inline void write_manifest(const Dataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("manifest: cannot open " + path + " for writing");
  write_manifest(ds, os);
}

inline Dataset load_manifest(std::istream& is) {
  Dataset ds;
  std::string line;
  if (!std::getline(is, line) || detail::trim(line) != "id,canonical_smiles,fold,role") {
    throw std::runtime_error("manifest: missing or malformed header");
  }
  while (std::getline(is, line)) {
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    DataRecord r;
    const auto c1 = t.find(',');
    const auto c2 = t.find(',', c1 == std::string::npos ? c1 : c1 + 1);
    const auto c3 = t.find(',', c2 == std::string::npos ? c2 : c2 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos) {
      throw std::runtime_error("manifest: malformed row: " + t);
    }
    r.id = t.substr(0, c1);
    r.canonical = t.substr(c1 + 1, c2 - c1 - 1);
    r.raw = r.canonical;
    r.fold = std::stoi(t.substr(c2 + 1, c3 - c2 - 1));
    if (r.fold < 0 || r.fold > 9) throw std::runtime_error("manifest: fold outside 0..9");
    const std::string role = t.substr(c3 + 1);
    if (role != role_name(role_of_fold(r.fold))) {
      throw std::runtime_error("manifest: role does not match fold in row: " + t);
    }
    ds.records.push_back(std::move(r));
  }
  if (ds.records.empty()) throw std::runtime_error("manifest: no records");
  return ds;
}

inline Dataset load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("manifest: cannot open " + path);
  return load_manifest(is);
}

// Parsed molecules of one split, in dataset order.
inline std::vector<MolGraph> split_molecules(const Dataset& ds, SplitRole role) {
  std::vector<MolGraph> out;
  for (const DataRecord* r : ds.split(role)) out.push_back(parse_smiles(r->canonical));
  return out;
}

}  // namespace molrl

#endif  // MOLRL_DATA_DATASET_HPP_
