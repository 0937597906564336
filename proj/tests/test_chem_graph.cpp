//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>

#include "molrl/chem/mol_graph.hpp"
#include "molrl/chem/smiles.hpp"

using namespace molrl;

TEST_CASE("valence table") {
  CHECK(max_valence(Element::H) == 1);
  CHECK(max_valence(Element::C) == 4);
  CHECK(max_valence(Element::N) == 3);
  CHECK(max_valence(Element::O) == 2);
  CHECK(max_valence(Element::F) == 1);
}

TEST_CASE("bond order accounting in half units") {
  CHECK(bond_half_units(BondOrder::Single) == 2);
  CHECK(bond_half_units(BondOrder::Double) == 4);
  CHECK(bond_half_units(BondOrder::Triple) == 6);
  CHECK(bond_half_units(BondOrder::Aromatic) == 3);  // order 1.5

  MolGraph g;
  const int c = g.add_atom(Element::C, 0);
  const int o = g.add_atom(Element::O, 0);
  const int n = g.add_atom(Element::N, 0);
  g.add_bond(c, o, BondOrder::Double);
  g.add_bond(c, n, BondOrder::Single);
  CHECK(g.bond_half_sum(c) == 6);
  CHECK(g.bond_order_sum(c) == 3);
  CHECK(g.free_valence(c) == 1);
}

TEST_CASE("free valence examples") {
  SECTION("methane carbon has 4") {
    const MolGraph g = parse_smiles("C");
    CHECK(g.free_valence(0) == 4);
  }
  SECTION("ethanol oxygen has 1") {
    const MolGraph g = parse_smiles("CCO");
    CHECK(g.atom(2).element == Element::O);
    CHECK(g.free_valence(2) == 1);
  }
  SECTION("nitrile nitrogen has 0") {
    const MolGraph g = parse_smiles("C#N");
    CHECK(g.atom(1).element == Element::N);
    CHECK(g.free_valence(1) == 0);
  }
  SECTION("non-negative over a parsed set") {
    for (const char* s : {"CC(=O)O", "c1ccccc1", "C1CC1", "N#N", "O=C=O", "FC(F)F"}) {
      const MolGraph g = parse_smiles(s);
      for (int v = 0; v < g.num_atoms(); ++v) CHECK(g.free_valence(v) >= 0);
    }
  }
}

TEST_CASE("element counts include implicit and explicit hydrogens") {
  SECTION("CCO") {
    const auto c = parse_smiles("CCO").element_counts();
    CHECK(c[static_cast<int>(Element::C)] == 2);
    CHECK(c[static_cast<int>(Element::O)] == 1);
    CHECK(c[static_cast<int>(Element::H)] == 6);
  }
  SECTION("FC(F)F") {
    const auto c = parse_smiles("FC(F)F").element_counts();
    CHECK(c[static_cast<int>(Element::C)] == 1);
    CHECK(c[static_cast<int>(Element::F)] == 3);
    CHECK(c[static_cast<int>(Element::H)] == 1);
  }
  SECTION("explicit hydrogen nodes count under H") {
    const auto c = parse_smiles("[H][H]").element_counts();
    CHECK(c[static_cast<int>(Element::H)] == 2);
    CHECK(c[static_cast<int>(Element::C)] == 0);
  }
  SECTION("empty graph yields all zeros") {
    const auto c = MolGraph{}.element_counts();
    for (int v : c) CHECK(v == 0);
  }
}

TEST_CASE("ring bond detection") {
  SECTION("toluene: ring bonds minus the methyl bridge") {
    const MolGraph g = parse_smiles("Cc1ccccc1");
    const auto rb = g.ring_bond_flags();
    int ring = 0, bridge = 0;
    for (std::size_t b = 0; b < rb.size(); ++b) rb[b] ? ++ring : ++bridge;
    CHECK(ring == 6);
    CHECK(bridge == 1);
  }
  SECTION("chain has no ring bonds") {
    const MolGraph g = parse_smiles("CCCC");
    for (bool f : g.ring_bond_flags()) CHECK_FALSE(f);
  }
  SECTION("spiro atoms flagged once") {
    const MolGraph g = parse_smiles("C1CC12CC2");
    const auto ra = g.ring_atom_flags();
    for (int v = 0; v < g.num_atoms(); ++v) CHECK(ra[v]);
    for (bool f : g.ring_bond_flags()) CHECK(f);
  }
}

TEST_CASE("graph topology helpers") {
  const MolGraph g = parse_smiles("CC(C)CO");
  CHECK(g.bfs_distance(0, 4) == 3);
  CHECK(g.bfs_distance(2, 2) == 0);
  CHECK(g.connected());

  MolGraph h;
  h.add_atom(Element::C, 4);
  h.add_atom(Element::O, 2);
  CHECK_FALSE(h.connected());
  int n = 0;
  const auto comp = h.component_ids(&n);
  CHECK(n == 2);
  CHECK(comp[0] != comp[1]);
}

TEST_CASE("subgraph compacts indices in ascending order") {
  const MolGraph g = parse_smiles("CCOCC");
  const MolGraph s = g.subgraph({4, 2, 3});
  REQUIRE(s.num_atoms() == 3);
  CHECK(s.atom(0).element == Element::O);
  CHECK(s.atom(1).element == Element::C);
  CHECK(s.atom(2).element == Element::C);
  CHECK(s.num_bonds() == 2);
}

TEST_CASE("validity errors") {
  SECTION("overbonded carbon") {
    MolGraph g;
    const int c = g.add_atom(Element::C, 0);
    for (int i = 0; i < 3; ++i) g.add_bond(c, g.add_atom(Element::O, 0), BondOrder::Double);
    CHECK_FALSE(g.valid());
  }
  SECTION("hydrogen node with implicit hydrogens") {
    MolGraph g;
    g.add_atom(Element::H, 1);
    CHECK_FALSE(g.valid());
  }
  SECTION("bonds plus stored hydrogens over valence") {
    MolGraph g;
    const int c = g.add_atom(Element::C, 4);
    g.add_bond(c, g.add_atom(Element::C, 3), BondOrder::Single);
    CHECK_FALSE(g.valid());
  }
  SECTION("aromatic bond outside a ring") {
    MolGraph g;
    const int a = g.add_atom(Element::C, 1);
    const int b = g.add_atom(Element::C, 1);
    g.add_bond(a, b, BondOrder::Aromatic);
    CHECK_FALSE(g.valid());
  }
  SECTION("parsed molecules are valid") {
    for (const char* s : {"CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "c1cc[nH]c1", "[H][H]", "[H]"})
      CHECK(parse_smiles(s).valid());
  }
}
