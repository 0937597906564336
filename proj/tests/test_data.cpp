//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "molrl/data/dataset.hpp"

using namespace molrl;

namespace {

std::vector<std::string> alkanes(int n) {
  std::vector<std::string> out;
  std::string s;
  for (int i = 0; i < n; ++i) {
    s.push_back('C');
    out.push_back(s);
  }
  return out;
}

std::string manifest_string(const Dataset& ds) {
  std::ostringstream os;
  write_manifest(ds, os);
  return os.str();
}

}  // namespace

TEST_CASE("fold roles: 0-7 train, 8 tune, 9 test") {
  for (int f = 0; f <= 7; ++f) REQUIRE(role_of_fold(f) == SplitRole::Train);
  REQUIRE(role_of_fold(8) == SplitRole::Tune);
  REQUIRE(role_of_fold(9) == SplitRole::Test);
  REQUIRE_THROWS_AS(role_of_fold(10), std::out_of_range);
  REQUIRE_THROWS_AS(role_of_fold(-1), std::out_of_range);
  REQUIRE(std::string(role_name(SplitRole::Train)) == "train");
  REQUIRE(std::string(role_name(SplitRole::Tune)) == "tune");
  REQUIRE(std::string(role_name(SplitRole::Test)) == "test");
}

TEST_CASE("ingest: filtering and drop accounting") {
  SECTION("charged molecules are dropped before parsing") {
    const Dataset ds = ingest_lines({"CCO", "[NH4+]", "C[O-]", "CC"}, 1);
    REQUIRE(ds.records.size() == 2);
    REQUIRE(ds.drops.charge == 2);
    REQUIRE(ds.drops.parse_error == 0);
  }

  SECTION("a hyphen outside brackets is an explicit single bond, not a charge") {
    const Dataset ds = ingest_lines({"C-C"}, 1);
    REQUIRE(ds.records.size() == 1);
    REQUIRE(ds.drops.charge == 0);
    REQUIRE(ds.records[0].canonical == "CC");
  }

  SECTION("parse failures are counted separately") {
    const Dataset ds = ingest_lines({"CCO", "not_a_smiles", "C1CC", "C(C"}, 1);
    REQUIRE(ds.records.size() == 1);
    REQUIRE(ds.drops.parse_error == 3);
  }

  SECTION("duplicates collapse to the first occurrence") {
    const Dataset ds = ingest_lines({"CCO", "OCC", "C(O)C", "CCN"}, 1);
    REQUIRE(ds.records.size() == 2);
    REQUIRE(ds.drops.duplicate == 2);
    REQUIRE(ds.records[0].raw == "CCO");
    REQUIRE(ds.records[0].canonical == ds.records[0].canonical);
    REQUIRE(ds.records[0].id == "1");
    REQUIRE(ds.records[1].raw == "CCN");
  }

  SECTION("heavy-atom cap") {
    IngestOptions opt;
    opt.max_heavy_atoms = 2;
    const Dataset ds = ingest_lines({"C", "CC", "CCO", "CCCC"}, 1, opt);
    REQUIRE(ds.records.size() == 2);
    REQUIRE(ds.drops.heavy_atoms == 2);
  }

  SECTION("limit stops after the requested number of survivors") {
    IngestOptions opt;
    opt.limit = 3;
    const Dataset ds = ingest_lines(alkanes(10), 1, opt);
    REQUIRE(ds.records.size() == 3);
  }

  SECTION("blank lines are skipped; empty input throws") {
    const Dataset ds = ingest_lines({"", "  ", "CCO", ""}, 1);
    REQUIRE(ds.records.size() == 1);
    REQUIRE_THROWS_AS(ingest_lines({}, 1), std::runtime_error);
    REQUIRE_THROWS_AS(ingest_lines({"[C+]"}, 1), std::runtime_error);
  }

  SECTION("csv input with header keeps the given ids") {
    const Dataset ds = ingest_lines({"id,smiles", "gdb_1,C", "gdb_5,CCO", "gdb_9,[O-]"}, 1);
    REQUIRE(ds.records.size() == 2);
    REQUIRE(ds.records[0].id == "gdb_1");
    REQUIRE(ds.records[1].id == "gdb_5");
    REQUIRE(ds.drops.charge == 1);
  }
}

TEST_CASE("fold assignment: balanced, deterministic, seed-permuted") {
  const std::vector<std::string> lines = alkanes(100);

  SECTION("ten-line toy set: every fold exactly once, fixed by the seed") {
    const Dataset a = ingest_lines(alkanes(10), 7);
    const Dataset b = ingest_lines(alkanes(10), 7);
    std::set<int> folds;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      REQUIRE(a.records[i].fold == b.records[i].fold);
      folds.insert(a.records[i].fold);
    }
    REQUIRE(folds.size() == 10);
  }

  SECTION("fold sizes differ by at most one and partition the set") {
    const Dataset ds = ingest_lines(lines, 3);
    REQUIRE(ds.records.size() == 100);
    int total = 0;
    for (int f = 0; f < 10; ++f) {
      const auto members = ds.fold_members(f);
      REQUIRE(members.size() == 10);
      total += static_cast<int>(members.size());
    }
    REQUIRE(total == 100);
    REQUIRE(ds.split(SplitRole::Train).size() == 80);
    REQUIRE(ds.split(SplitRole::Tune).size() == 10);
    REQUIRE(ds.split(SplitRole::Test).size() == 10);
  }

  SECTION("different seeds permute folds over the same record set") {
    const Dataset a = ingest_lines(lines, 3);
    const Dataset b = ingest_lines(lines, 4);
    REQUIRE(a.records.size() == b.records.size());
    bool any_fold_differs = false;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
      REQUIRE(a.records[i].canonical == b.records[i].canonical);
      any_fold_differs |= a.records[i].fold != b.records[i].fold;
    }
    REQUIRE(any_fold_differs);
  }

  SECTION("no canonical smiles appears in two folds") {
    const Dataset ds = ingest_lines({"CCO", "OCC", "CC", "C", "CCC"}, 5);
    std::set<std::string> seen;
    for (const DataRecord& r : ds.records) {
      REQUIRE(seen.insert(r.canonical).second);
      REQUIRE(r.fold >= 0);
      REQUIRE(r.fold <= 9);
    }
  }
}

TEST_CASE("manifest: round trip and validation") {
  const Dataset ds = ingest_lines(alkanes(25), 9);

  SECTION("write, load, write again: identical bytes") {
    const std::string once = manifest_string(ds);
    std::istringstream is(once);
    const Dataset back = load_manifest(is);
    REQUIRE(back.records.size() == ds.records.size());
    REQUIRE(manifest_string(back) == once);
  }

  SECTION("same seed re-ingestion reproduces the manifest byte for byte") {
    const Dataset again = ingest_lines(alkanes(25), 9);
    REQUIRE(manifest_string(again) == manifest_string(ds));
  }

  SECTION("file round trip") {
    namespace fs = std::filesystem;
    const std::string path = (fs::temp_directory_path() / "molrl_manifest_test.csv").string();
    write_manifest(ds, path);
    const Dataset back = load_manifest(path);
    REQUIRE(manifest_string(back) == manifest_string(ds));
    fs::remove(path);
    REQUIRE_THROWS_AS(load_manifest(path), std::runtime_error);
  }

  SECTION("malformed manifests are rejected") {
    std::istringstream bad_header("id,smiles,fold\n");
    REQUIRE_THROWS_AS(load_manifest(bad_header), std::runtime_error);
    std::istringstream bad_row("id,canonical_smiles,fold,role\nx,CCO,12,train\n");
    REQUIRE_THROWS_AS(load_manifest(bad_row), std::runtime_error);
    std::istringstream bad_role("id,canonical_smiles,fold,role\nx,CCO,0,test\n");
    REQUIRE_THROWS_AS(load_manifest(bad_role), std::runtime_error);
  }

  SECTION("split_molecules parses the canonical forms") {
    const std::vector<MolGraph> tune = split_molecules(ds, SplitRole::Tune);
    REQUIRE(tune.size() == ds.split(SplitRole::Tune).size());
    for (const MolGraph& g : tune) REQUIRE_FALSE(g.empty());
  }
}
