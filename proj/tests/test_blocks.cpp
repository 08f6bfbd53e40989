#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "polyalg/blocks.hpp"
#include "polyalg/errors.hpp"
#include "polyalg/pla.hpp"
#include "polyalg/polarization.hpp"

using namespace polyalg;

TEST_CASE("mps blocks partition the untruncated states") {
  const int s = 2, cutoff = 12;
  const auto gen = build_mps_generators({1, s}, cutoff);
  const auto dec = decompose_mps(gen);
  for (const auto& c : mps_partition_report(gen, dec).checks()) {
    INFO(c.identity_name);
    CHECK(c.pass);
  }
  // Enumerate (k, 2j) independently: reference fits iff k + 2j <= cutoff,
  // chain fits iff k + s 2j <= cutoff.
  std::set<std::pair<int, int>> fitting, clipped;
  for (int k = 0; k < s; ++k)
    for (int tj = 0; k + tj <= cutoff; ++tj) (k + s * tj <= cutoff ? fitting : clipped).insert({k, tj});
  std::set<std::pair<int, int>> got, got_clipped;
  for (const auto& b : dec.blocks) {
    got.insert({b.label.k, b.label.two_j});
    CHECK(b.dimension == b.label.two_j + 1);
    CHECK(orthonormality_defect(b) < 1e-12);
    // Column kappa is the basis state (n0, n1) = (2j - kappa, k + s kappa).
    for (int kappa = 0; kappa < b.dimension; ++kappa) {
      const auto st = oracle::chain_state(s, b.label.k, b.label.two_j, kappa);
      CHECK(b.dominant_occupation(kappa) == Occupation{st.n0, st.n1});
    }
  }
  for (const auto& c : dec.clipped) got_clipped.insert({c.k, c.two_j});
  CHECK(got == fitting);
  CHECK(got_clipped == clipped);
}

TEST_CASE("V+ restricted to a block is nilpotent of index 2j+1") {
  const auto gen = build_mps_generators({1, 2}, 12);
  const auto b = mps_block(gen, 1, 4);
  const auto r = restrict_to_block(gen.Vplus[0], b);
  CHECK(r.invariant);
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Identity(5, 5);
  for (int i = 0; i < 4; ++i) p = p * r.matrix;
  CHECK(p.cwiseAbs().maxCoeff() > 1.0);
  CHECK((p * r.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("blocks that do not fit are refused") {
  const auto gen = build_mps_generators({1, 2}, 8);
  CHECK_THROWS_AS(mps_block(gen, 0, 5), IndexError);
  CHECK_THROWS_AS(mps_block(gen, 2, 1), IndexError);
  CHECK_NOTHROW(mps_block(gen, 0, 4));
}

TEST_CASE("leaking operators are flagged") {
  const auto gen = build_mps_generators({1, 2}, 8);
  const auto b = mps_block(gen, 0, 2);
  const auto a1 = ladder_op(gen.basis, 1, Ladder::create);
  const auto r = restrict_to_block(a1, b);
  CHECK_FALSE(r.invariant);
  CHECK(r.leakage > 0.5);
  CHECK(restrict_to_block(gen.R1, b).invariant);
}

TEST_CASE("polarization shells split into quasispin multiplets") {
  const auto pol = build_polarization_ops(2, 4);
  // Shell 2 of two spatial modes: p = 0 once and p = 1 three times.
  const auto blocks = decompose_polarization(pol, 2);
  REQUIRE(blocks.size() == 2);
  CHECK(blocks[0].label.two_p == 0);
  CHECK(blocks[0].dimension == 1);
  CHECK(blocks[1].label.two_p == 2);
  CHECK(blocks[1].multiplicity == 3);
  CHECK(blocks[1].dimension == 9);
  for (const auto& b : blocks) {
    CHECK(orthonormality_defect(b) < 1e-12);
    CHECK(restrict_to_block(pol.P2sq, b).invariant);
    CHECK(restrict_to_block(pol.Pplus, b).invariant);
  }

  // The singlet is the biphoton cluster state X+_12 |0>.
  Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(pol.basis->size());
  vac(0) = 1.0;
  Eigen::VectorXcd x = pol.Xdag[0][1].matrix() * vac;
  x.normalize();
  CHECK(std::norm(blocks[0].column(0).dot(x)) >= 1.0 - 1e-10);

  // Shell sizes add up for every shell.
  for (int shell = 0; shell <= 4; ++shell) {
    int dim = 0;
    for (const auto& b : decompose_polarization(pol, shell)) dim += b.dimension;
    CHECK(dim == static_cast<int>(pol.basis->shell_indices(shell).size()));
  }
}

TEST_CASE("quasispin sectors collect every shell") {
  const auto pol = build_polarization_ops(2, 4);
  const auto sector = polarization_sector(pol, 0, 4);
  // p = 0 for two spatial modes: one state per even shell, (X+_12)^m |0>.
  CHECK(sector.dimension == 3);
  CHECK(orthonormality_defect(sector) < 1e-12);
  CHECK(restrict_to_block(pol.Xdag[0][1], sector).invariant);
  CHECK(restrict_to_block(pol.E[0][1], sector).invariant);
  CHECK_THROWS_AS(decompose_polarization(pol, 5), ValidationError);
}

TEST_CASE("block inventory lists labels and dimensions") {
  const auto gen = build_mps_generators({1, 2}, 6);
  const auto j = block_inventory_json(decompose_mps(gen).blocks);
  REQUIRE(j.size() > 0);
  CHECK(j[0]["label"]["kind"] == "mps");
  CHECK(j[0]["dimension"] == 1);
}
