//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>
#include <string>
#include <vector>

#include "molrl/chem/aromaticity.hpp"
#include "molrl/chem/canonical.hpp"
#include "molrl/chem/mol_graph.hpp"
#include "molrl/chem/smiles.hpp"
#include "molrl/util/rng.hpp"

using namespace molrl;

namespace {

std::string canon(const std::string& smiles) {
  return write_canonical_smiles(parse_smiles(smiles));
}

// Rebuilds g with atom indices permuted; used for relabel-invariance checks.
MolGraph permute(const MolGraph& g, const std::vector<int>& perm) {
  MolGraph out;
  std::vector<int> inv(g.num_atoms());
  for (int v = 0; v < g.num_atoms(); ++v) inv[perm[v]] = v;
  for (int v = 0; v < g.num_atoms(); ++v) {
    const Atom& a = g.atom(inv[v]);
    out.add_atom(a.element, a.h_count);
  }
  for (const Bond& b : g.bonds()) out.add_bond(perm[b.a], perm[b.b], b.order);
  return out;
}

const std::vector<std::string> kCorpus = {
    "C",
    "O",
    "N#N",
    "O=C=O",
    "CCO",
    "CC(=O)O",
    "CC(C)C",
    "C1CC1",
    "C1CCCCC1",
    "c1ccccc1",
    "Cc1ccccc1",
    "c1ccncc1",
    "c1cc[nH]c1",
    "c1ccoc1",
    "CN1C=NC2=C1C(=O)N(C(=O)N2C)C",
    "C1=CC2=CC=CC=C2C=C1",
    "c1ccc2ccccc2c1",
    "c1ccn2cccc2c1",
    "C1CC2CCC1C2",
    "OC1CCOC1",
    "N#CC1=CC=CO1",
    "FC(F)C(O)CN",
    "[H][H]",
    "[H]",
    "C12C3C1C23",
};

}  // namespace

TEST_CASE("equal graphs from different traversals") {
  CHECK(canon("OCC") == canon("CCO"));
  CHECK(canon("CC(C)O") == canon("OC(C)C"));
  CHECK(canon("C(F)(F)F") == canon("FC(F)F"));
}

TEST_CASE("kekule and aromatic forms write identically") {
  CHECK(canon("C1=CC=CC=C1") == canon("c1ccccc1"));
  CHECK(canon("c1ccccc1") == "c1ccccc1");
  CHECK(canon("O1C=CC=C1") == canon("c1ccoc1"));
  CHECK(canon("C1=CC=CN1") == canon("c1cc[nH]c1"));
  CHECK(canon("N1=CC=CC=C1") == canon("c1ccncc1"));
}

TEST_CASE("single atom strings") {
  CHECK(canon("O") == "O");
  CHECK(canon("C") == "C");
  CHECK(canon("[H]") == "[H]");
}

TEST_CASE("round trip is a fixed point") {
  for (const std::string& s : kCorpus) {
    const std::string once = canon(s);
    const std::string twice = write_canonical_smiles(parse_smiles(once));
    INFO(s << " -> " << once << " -> " << twice);
    CHECK(once == twice);
  }
}

TEST_CASE("relabel invariance") {
  Rng rng(20260825);
  for (const std::string& s : kCorpus) {
    const MolGraph g = parse_smiles(s);
    const std::string ref = write_canonical_smiles(g);
    std::vector<int> perm(g.num_atoms());
    for (int v = 0; v < g.num_atoms(); ++v) perm[v] = v;
    for (int trial = 0; trial < 20; ++trial) {
      rng.shuffle(perm);
      INFO(s << " trial " << trial);
      CHECK(write_canonical_smiles(permute(g, perm)) == ref);
    }
  }
}

TEST_CASE("explicit hydrogens fold into heavy neighbors") {
  CHECK(canon("[H]C([H])([H])[H]") == "C");
  CHECK(canon("[H]OC") == canon("CO"));
  CHECK(canon("[H][H]") == "[H][H]");

  MolGraph g;
  const int c = g.add_atom(Element::C, 3);
  const int h = g.add_atom(Element::H, 0);
  g.add_bond(c, h, BondOrder::Single);
  CHECK(write_canonical_smiles(g) == "C");
}

TEST_CASE("empty graph writes as empty string") {
  CHECK(write_canonical_smiles(MolGraph{}) == "");
}

TEST_CASE("kekulize") {
  SECTION("benzene alternates") {
    const MolGraph k = kekulize(parse_smiles("c1ccccc1"));
    int singles = 0, doubles = 0;
    for (const Bond& b : k.bonds()) {
      singles += b.order == BondOrder::Single;
      doubles += b.order == BondOrder::Double;
    }
    CHECK(singles == 3);
    CHECK(doubles == 3);
    for (int v = 0; v < k.num_atoms(); ++v) CHECK(k.bond_order_sum(v) == 3);
    CHECK(k.valid());
  }
  SECTION("no aromatic bonds: identity") {
    const MolGraph g = parse_smiles("CC(=O)O");
    const MolGraph k = kekulize(g);
    CHECK(k.num_bonds() == g.num_bonds());
    for (int b = 0; b < g.num_bonds(); ++b) CHECK(k.bond(b).order == g.bond(b).order);
  }
  SECTION("pyrrole nitrogen keeps single bonds") {
    const MolGraph g = parse_smiles("c1cc[nH]c1");
    const MolGraph k = kekulize(g);
    for (int v = 0; v < k.num_atoms(); ++v) {
      if (k.atom(v).element != Element::N) continue;
      for (const MolGraph::Adj& a : k.neighbors(v))
        CHECK(k.bond(a.bond).order == BondOrder::Single);
    }
  }
  SECTION("non-kekulizable system reported") {
    // Five-ring of bare carbons in aromatic form: odd slack set has no
    // perfect matching.
    MolGraph g;
    for (int i = 0; i < 5; ++i) g.add_atom(Element::C, 1);
    for (int i = 0; i < 5; ++i) g.add_bond(i, (i + 1) % 5, BondOrder::Aromatic);
    CHECK_THROWS_AS(kekulize(g), KekulizeError);
  }
  SECTION("hydrogen counts never change") {
    const MolGraph g = parse_smiles("Cc1ccc(N)cc1");
    const MolGraph k = kekulize(g);
    for (int v = 0; v < g.num_atoms(); ++v) CHECK(k.atom(v).h_count == g.atom(v).h_count);
  }
}

TEST_CASE("aromaticity perception") {
  SECTION("kekule benzene aromatizes") {
    const MolGraph p = perceive_aromaticity(parse_smiles("C1=CC=CC=C1"));
    int arom = 0;
    for (const Bond& b : p.bonds()) arom += b.order == BondOrder::Aromatic;
    CHECK(arom == 6);
  }
  SECTION("cyclohexane unchanged") {
    const MolGraph p = perceive_aromaticity(parse_smiles("C1CCCCC1"));
    for (const Bond& b : p.bonds()) CHECK(b.order == BondOrder::Single);
  }
  SECTION("cyclobutadiene fails the electron count") {
    const MolGraph p = perceive_aromaticity(parse_smiles("C1=CC=C1"));
    for (const Bond& b : p.bonds()) CHECK(b.order != BondOrder::Aromatic);
  }
  SECTION("five-ring heteroaromatics") {
    for (const char* s : {"O1C=CC=C1", "N1C=CC=C1"}) {
      const MolGraph p = perceive_aromaticity(parse_smiles(s));
      int arom = 0;
      for (const Bond& b : p.bonds()) arom += b.order == BondOrder::Aromatic;
      INFO(s);
      CHECK(arom == 5);
    }
  }
  SECTION("quinone stays kekule") {
    const MolGraph p = perceive_aromaticity(parse_smiles("O=C1C=CC(=O)C=C1"));
    for (const Bond& b : p.bonds()) CHECK(b.order != BondOrder::Aromatic);
  }
  SECTION("cumulated ring double bonds stay kekule") {
    // Six pi electrons by naive counting, but the two adjacent double bonds
    // share an sp carbon; aromatizing this ring would not re-kekulize.
    for (const char* s : {"C1=NC=C=C=C1", "C1=CC=C=C=C1"}) {
      const MolGraph g = parse_smiles(s);
      const MolGraph p = perceive_aromaticity(g);
      INFO(s);
      for (const Bond& b : p.bonds()) CHECK(b.order != BondOrder::Aromatic);
      const std::string smi = write_canonical_smiles(g);
      CHECK(canonical_equal(g, parse_smiles(smi)));
    }
  }
  SECTION("idempotent") {
    for (const std::string& s : kCorpus) {
      const MolGraph once = perceive_aromaticity(parse_smiles(s));
      const MolGraph twice = perceive_aromaticity(once);
      REQUIRE(once.num_bonds() == twice.num_bonds());
      for (int b = 0; b < once.num_bonds(); ++b) {
        INFO(s << " bond " << b);
        CHECK(once.bond(b).order == twice.bond(b).order);
      }
    }
  }
  SECTION("kekulize then perceive restores aromatic molecules") {
    for (const char* s : {"c1ccccc1", "c1ccncc1", "c1cc[nH]c1", "c1ccoc1", "Cc1ccccc1"}) {
      const MolGraph g = parse_smiles(s);
      CHECK(write_canonical_smiles(perceive_aromaticity(kekulize(g))) ==
            write_canonical_smiles(g));
    }
  }
  SECTION("fused systems aromatize fully") {
    const MolGraph p = perceive_aromaticity(parse_smiles("C1=CC2=CC=CC=C2C=C1"));
    CHECK(p.valid());
    int arom = 0;
    for (const Bond& b : p.bonds()) arom += b.order == BondOrder::Aromatic;
    CHECK(arom == 11);
    CHECK(canon("C1=CC2=CC=CC=C2C=C1") == canon("c1ccc2ccccc2c1"));
  }
}
