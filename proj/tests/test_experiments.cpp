//
// Project molgraph-rl - Copyright 2026 molgraph-rl contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "molrl/chem/smiles.hpp"
#include "molrl/experiments/experiments.hpp"

using namespace molrl;

namespace {

MolGraph mol(const std::string& s) { return parse_smiles(s); }

Model small_model(std::uint64_t seed, int horizon) {
  Rng rng(seed);
  Model m(rng);
  m.horizon = horizon;
  return m;
}

std::string perturb_csv(const std::vector<PerturbRow>& rows) {
  std::ostringstream os;
  write_perturb_csv(rows, os);
  return os.str();
}

std::string explore_csv(const std::vector<ExploreRow>& rows) {
  std::ostringstream os;
  write_explore_csv(rows, os);
  return os.str();
}

}  // namespace

TEST_CASE("greedy decode: deterministic, batch-size independent, valid") {
  Model m = small_model(11, 6);
  const MdpConfig cfg = [&] {
    MdpConfig c = MdpConfig::decoder();
    c.max_steps = m.horizon;
    return c;
  }();

  Rng rng(4);
  std::vector<Tensor> zs;
  for (int i = 0; i < 6; ++i) zs.push_back(standard_normal_row(rng, kLatentDim));
  std::vector<const Tensor*> zptrs;
  for (const Tensor& z : zs) zptrs.push_back(&z);

  ValueFastPath fp_a(m);
  const std::vector<MolGraph> all = decode_latents(fp_a, zptrs, cfg);
  REQUIRE(all.size() == 6);

  SECTION("chunking does not change any decode") {
    ValueFastPath fp_b(m);
    const std::vector<MolGraph> by2 = decode_latents_chunked(fp_b, zptrs, cfg, 2);
    ValueFastPath fp_c(m);
    const std::vector<MolGraph> by5 = decode_latents_chunked(fp_c, zptrs, cfg, 5);
    for (std::size_t i = 0; i < all.size(); ++i) {
      CHECK(write_canonical_smiles(by2[i]) == write_canonical_smiles(all[i]));
      CHECK(write_canonical_smiles(by5[i]) == write_canonical_smiles(all[i]));
    }
    REQUIRE_THROWS_AS(decode_latents_chunked(fp_b, zptrs, cfg, 0), std::invalid_argument);
  }

  SECTION("matches a single rollout at epsilon zero") {
    ValueFastPath fp_b(m);
    for (std::size_t i = 0; i < zs.size(); ++i) {
      const Tensor* z = zptrs[i];
      const SuccessorValueFn vf = [&fp_b, z, &cfg](const std::vector<const MolGraph*>& succ,
                                                   int t_next) {
        const int tq = std::min(t_next, cfg.max_steps - 1);
        return fp_b.values(succ, std::vector<const Tensor*>(succ.size(), z),
                           std::vector<int>(succ.size(), tq));
      };
      Rng walk(0);
      const Episode ep = rollout(nullptr, nullptr, vf, 0.0, walk, cfg);
      CHECK(write_canonical_smiles(ep.steps.back().next) == write_canonical_smiles(all[i]));
    }
  }

  SECTION("every decode is a valid molecule") {
    for (const MolGraph& g : all) CHECK(g.validity_errors().empty());
  }
}

TEST_CASE("reconstruction scoring") {
  SECTION("idealized replays score a perfect report") {
    const std::vector<MolGraph> targets = {mol("CCO"), mol("CC"), mol("C=O"), mol("CCN")};
    MdpConfig cfg = MdpConfig::decoder();
    cfg.max_steps = 8;
    std::vector<MolGraph> decoded;
    for (const MolGraph& y : targets) {
      const IdealizedResult res = idealized_episode(y, cfg);
      REQUIRE(res.ok());
      decoded.push_back(res.episode->steps.back().next);
    }
    const ReconstructionReport rep = score_reconstruction(targets, decoded);
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.accuracy == 1.0);
    CHECK(rep.exact_matches == 4);
    CHECK(rep.mean_tanimoto == 1.0);
    CHECK(rep.mean_edit_distance == 0.0);
    CHECK(rep.edit_unreached == 0);
    for (const ReconstructionRow& r : rep.rows) {
      CHECK(r.exact);
      CHECK(r.tanimoto == 1.0);
      REQUIRE(r.edit_distance.has_value());
      CHECK(*r.edit_distance == 0);
    }
  }

  SECTION("mismatches report similarity and reachable distance") {
    const ReconstructionReport rep = score_reconstruction({mol("CCO")}, {mol("CCC")});
    REQUIRE(rep.rows.size() == 1);
    CHECK_FALSE(rep.rows[0].exact);
    CHECK(rep.rows[0].tanimoto < 1.0);
    REQUIRE(rep.rows[0].edit_distance.has_value());
    CHECK(*rep.rows[0].edit_distance >= 1);
    CHECK(rep.accuracy == 0.0);
  }

  SECTION("limit hits are recorded as unreached, not as a number") {
    EvalOptions opt;
    opt.edit_limit = 1;
    const ReconstructionReport rep =
        score_reconstruction({mol("C"), mol("CC")}, {mol("CCCCO"), mol("CC")}, opt);
    REQUIRE(rep.rows.size() == 2);
    CHECK_FALSE(rep.rows[0].edit_distance.has_value());
    CHECK(rep.edit_unreached == 1);
    REQUIRE(rep.rows[1].edit_distance.has_value());
    CHECK(rep.mean_edit_distance == 0.0);
    CHECK(rep.accuracy == 0.5);
  }

  SECTION("size mismatch throws") {
    REQUIRE_THROWS_AS(score_reconstruction({mol("C")}, {}), std::invalid_argument);
  }
}

TEST_CASE("reconstruction csv layout") {
  const ReconstructionReport perfect = score_reconstruction({mol("CCO")}, {mol("CCO")});
  std::ostringstream os;
  write_reconstruction_csv(perfect, os);
  CHECK(os.str() ==
        "input_smiles,output_smiles,exact_match,tanimoto,edit_distance\n"
        "CCO,CCO,1,1,0\n"
        "summary,,1,1,\n");

  EvalOptions opt;
  opt.edit_limit = 1;
  const ReconstructionReport missed = score_reconstruction({mol("C")}, {mol("CCCCO")}, opt);
  std::ostringstream os2;
  write_reconstruction_csv(missed, os2);
  const std::string text = os2.str();
  // The unreached edit distance leaves the final cell empty.
  CHECK(text.find("C,CCCO") == std::string::npos);
  CHECK(text.find("C,CCCCO,0,") != std::string::npos);
  const std::size_t row_start = text.find("C,CCCCO");
  const std::size_t row_end = text.find('\n', row_start);
  CHECK(text[row_end - 1] == ',');
}

TEST_CASE("random walk policy reconstructs essentially nothing") {
  Model m = small_model(2, 5);
  std::vector<MolGraph> targets;
  for (const char* s : {"C", "CC", "CCO", "CCN", "C=O", "CCC", "CO", "CN", "C#N", "CC=O",
                        "OCO", "NCC", "C#C", "CC#C", "COC", "CCCO", "NCO", "C=C", "CC(C)C",
                        "OC=O"}) {
    targets.push_back(mol(s));
  }
  EvalOptions opt;
  opt.policy = DecodePolicy::RandomWalk;
  opt.edit_limit = 1;
  opt.edit_max_states = 500;
  const ReconstructionReport rep = evaluate_reconstruction(m, targets, 5, opt);
  REQUIRE(rep.rows.size() == targets.size());
  CHECK(rep.accuracy <= 0.01);

  // Same seed, same report; the policy never reads the model.
  const ReconstructionReport again = evaluate_reconstruction(m, targets, 5, opt);
  std::ostringstream a, b;
  write_reconstruction_csv(rep, a);
  write_reconstruction_csv(again, b);
  CHECK(a.str() == b.str());
}

TEST_CASE("perturb sweep shape, order, and determinism") {
  Model m = small_model(7, 4);
  const std::vector<MolGraph> starts = {mol("CCO"), mol("CC")};
  PerturbOptions opt;
  opt.repeats = 3;
  opt.factors_per_side = 2;
  opt.decode_batch = 7;

  const std::vector<PerturbRow> rows = perturb_sweep(m, starts, 13, opt);
  REQUIRE(rows.size() == 2u * 4u * 3u);

  SECTION("rows are sorted by (start, factor, repeat) with no zero factor") {
    std::size_t k = 0;
    for (int s = 0; s < 2; ++s) {
      for (const double f : {-0.2, -0.1, 0.1, 0.2}) {
        for (int r = 0; r < 3; ++r, ++k) {
          CHECK(rows[k].start_id == s);
          CHECK(rows[k].factor == Catch::Approx(f).margin(1e-12));
          CHECK(rows[k].repeat == r);
          CHECK(rows[k].factor != 0.0);
        }
      }
    }
  }

  SECTION("distances behave like a scaled shared direction") {
    for (const PerturbRow& r : rows) {
      CHECK(r.cosine_distance >= 0.0);
      CHECK(r.cosine_distance <= 2.0);
      CHECK(r.euclidean_distance > 0.0);
      CHECK(r.tanimoto >= 0.0);
      CHECK(r.tanimoto <= 1.0);
      if (!r.output.empty()) CHECK(parse_smiles(r.output).validity_errors().empty());
    }
    // Within one (start, repeat) the direction is shared, so the euclidean
    // distance is |factor| times the direction norm.
    const auto find = [&rows](int s, double f, int r) {
      for (const PerturbRow& row : rows) {
        if (row.start_id == s && row.repeat == r && std::abs(row.factor - f) < 1e-9) return row;
      }
      FAIL("row not found");
      return rows[0];
    };
    const PerturbRow r1 = find(0, 0.1, 0);
    const PerturbRow r2 = find(0, 0.2, 0);
    const PerturbRow rm = find(0, -0.1, 0);
    CHECK(r2.euclidean_distance == Catch::Approx(2.0 * r1.euclidean_distance).epsilon(1e-3));
    CHECK(rm.euclidean_distance == Catch::Approx(r1.euclidean_distance).epsilon(1e-3));
  }

  SECTION("identical seed and any batch size reproduce the csv") {
    PerturbOptions big = opt;
    big.decode_batch = 24;
    const std::vector<PerturbRow> again = perturb_sweep(m, starts, 13, big);
    CHECK(perturb_csv(again) == perturb_csv(rows));
    const std::vector<PerturbRow> other = perturb_sweep(m, starts, 14, opt);
    CHECK(perturb_csv(other) != perturb_csv(rows));
  }

  SECTION("csv header names the schema") {
    const std::string text = perturb_csv(rows);
    CHECK(text.rfind("start_id,factor,repeat,cosine_distance,euclidean_distance,"
                     "tanimoto_morgan_r3,output_smiles\n", 0) == 0);
  }
}

TEST_CASE("cosine distance of a vector with itself is zero") {
  Rng rng(9);
  const Tensor z = standard_normal_row(rng, kLatentDim);
  CHECK(detail::cosine_distance(z, z) == 0.0);
  CHECK(detail::euclidean_distance(z, z) == 0.0);
}

TEST_CASE("median tanimoto by cosine decile") {
  std::vector<PerturbRow> rows;
  for (int i = 0; i < 20; ++i) {
    PerturbRow r;
    r.cosine_distance = 0.01 * i;
    r.tanimoto = 1.0 - 0.05 * i;
    rows.push_back(r);
  }
  const std::vector<double> med = median_tanimoto_by_cosine(rows, 10);
  REQUIRE(med.size() == 10);
  CHECK(med[0] == Catch::Approx(0.975));
  for (std::size_t i = 1; i < med.size(); ++i) CHECK(med[i] < med[i - 1]);
  REQUIRE_THROWS_AS(median_tanimoto_by_cosine(rows, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(median_tanimoto_by_cosine({}, 10), std::invalid_argument);
}

TEST_CASE("orthogonal grid walk") {
  Model m = small_model(21, 4);

  SECTION("direction pair is orthonormal") {
    Rng rng(33);
    const auto [d1, d2] = orthonormal_directions(rng);
    double n1 = 0.0, n2 = 0.0, dot = 0.0;
    for (int c = 0; c < kLatentDim; ++c) {
      n1 += static_cast<double>(d1.at(0, c)) * d1.at(0, c);
      n2 += static_cast<double>(d2.at(0, c)) * d2.at(0, c);
      dot += static_cast<double>(d1.at(0, c)) * d2.at(0, c);
    }
    CHECK(std::abs(n1 - 1.0) < 1e-6);
    CHECK(std::abs(n2 - 1.0) < 1e-6);
    CHECK(std::abs(dot) < 1e-6);
  }

  Rng rng(6);
  const Tensor start = target_distribution(m, mol("CCC(C)=O")).sample(rng);
  const std::vector<ExploreRow> rows = explore_grid(m, start, 33);
  REQUIRE(rows.size() == 121);

  SECTION("grid covers 11x11 lattice points at step 4") {
    std::set<std::pair<int, int>> seen;
    for (const ExploreRow& r : rows) {
      seen.insert({r.i, r.j});
      CHECK(r.coeff_a == Catch::Approx(-20.0 + 4.0 * r.i));
      CHECK(r.coeff_b == Catch::Approx(-20.0 + 4.0 * r.j));
      if (!r.smiles.empty()) CHECK(parse_smiles(r.smiles).validity_errors().empty());
    }
    CHECK(seen.size() == 121);
  }

  SECTION("grid center decodes the unperturbed embedding") {
    const ExploreRow* center = nullptr;
    for (const ExploreRow& r : rows) {
      if (r.i == 5 && r.j == 5) center = &r;
    }
    REQUIRE(center != nullptr);
    CHECK(center->coeff_a == 0.0);
    CHECK(center->coeff_b == 0.0);
    MdpConfig cfg = MdpConfig::decoder();
    cfg.max_steps = m.horizon;
    ValueFastPath fp(m);
    const std::vector<MolGraph> plain = decode_latents(fp, {&start}, cfg);
    CHECK(center->smiles == write_canonical_smiles(plain[0]));
  }

  SECTION("same seed reproduces the csv") {
    const std::vector<ExploreRow> again = explore_grid(m, start, 33);
    CHECK(explore_csv(again) == explore_csv(rows));
  }
}

TEST_CASE("model restore from a checkpoint file") {
  namespace fs = std::filesystem;
  Rng rng(3);
  Model a(rng);
  a.horizon = 9;

  const std::string path = (fs::temp_directory_path() / "molrl_experiments_ck.ckpt").string();
  Checkpoint ck;
  ck.step = 42;
  ck.put(a.collect());
  save_checkpoint(ck, path);

  Model b = load_model(path, 9);
  REQUIRE(b.horizon == 9);
  const MolGraph probe = mol("CCO");
  const Tensor z(1, kLatentDim);
  CHECK(value(b, probe, z, 0) == value(a, probe, z, 0));
  CHECK(value(b, probe, z, 3) == value(a, probe, z, 3));
  fs::remove(path);
  REQUIRE_THROWS_AS(load_model(path, 9), std::runtime_error);
}
