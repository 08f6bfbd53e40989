#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "polyalg/blocks.hpp"
#include "polyalg/errors.hpp"
#include "polyalg/pla.hpp"

using namespace polyalg;

namespace {

void require_pass(const Report& r) {
  for (const auto& c : r.checks()) {
    INFO(r.name() << ": " << c.identity_name << " residual " << c.max_residual);
    CHECK(c.pass);
  }
}

}  // namespace

TEST_CASE("commutation relations close for the standard model family") {
  for (auto [n, s] : {std::pair{1, 1}, {1, 2}, {1, 3}, {2, 2}, {2, 1}, {3, 2}}) {
    CAPTURE(n);
    CAPTURE(s);
    const auto gen = build_mps_generators({n, s}, n == 3 ? 7 : 10);
    require_pass(verify_pla_cr(gen, 2 * s));
  }
}

TEST_CASE("cluster operators match explicit matrix elements") {
  const int s = 2;
  const auto gen = build_mps_generators({1, s}, 9);
  const auto vp = gen.Vplus[0].to_dense();
  for (std::size_t c = 0; c < gen.basis->size(); ++c) {
    const auto& in = gen.basis->state(c);
    if (in[0] == 0 || in[0] + in[1] - 1 + s > 9) continue;
    const int out_occ[] = {in[0] - 1, in[1] + s};
    const auto r = gen.basis->index_of(out_occ);
    REQUIRE(r);
    // a1^+^2 a0 |n0, n1> = sqrt(n0 (n1+1)(n1+2)) |n0-1, n1+2>.
    const double expect = std::sqrt(in[0] * (in[1] + 1.0) * (in[1] + 2.0));
    CHECK(std::abs(vp(*r, c) - expect) < 1e-13);
  }
}

TEST_CASE("the printed Cartan normalization fails to raise by one for s >= 2") {
  const int s = 2;
  const auto gen = build_mps_generators({1, s}, 8);
  const auto printed = (1.0 / (s + 1.0)) * (gen.N - static_cast<double>(s) * gen.E00);
  const auto P = interior_projector(gen.basis, 2 * s);
  CHECK(interior_residual(commutator(printed, gen.Vplus[0]), gen.Vplus[0], P) > 0.1);
  CHECK(interior_residual(commutator(gen.V0, gen.Vplus[0]), gen.Vplus[0], P) < 1e-12);
}

TEST_CASE("structure polynomial agrees with the closed form off the lattice") {
  for (int s = 1; s <= 3; ++s) {
    const int cutoff = s * (s + 3);
    const auto gen = build_mps_generators({1, s}, cutoff);
    for (const auto& b : decompose_mps(gen).blocks) {
      if (b.dimension < s + 2) continue;
      const auto q = extract_structure_polynomial(gen, b);
      CAPTURE(b.label.to_string());
      CHECK(q.degree == s + 1);
      const double r1 = oracle::chain_state(s, b.label.k, b.label.two_j, 0).r1;
      CHECK(q.r1 == doctest::Approx(r1));
      for (double v : {-3.3, -0.5, 0.37, 1.9, 4.25}) {
        const double ref = oracle::q_closed(s, r1, v);
        CHECK(std::abs(q(v) - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
      }
      require_pass(commutator_polynomial_check(gen, b, q));
    }
  }
}

TEST_CASE("s = 1 recovers the su(2) ladder form") {
  const auto gen = build_mps_generators({1, 1}, 10);
  for (int two_j = 2; two_j <= 5; ++two_j) {
    const auto q = extract_structure_polynomial(gen, mps_block(gen, 0, two_j));
    const double j = 0.5 * two_j;
    // V0 = m on the block, V+V- = j(j+1) - m(m-1).
    for (double m : {-j, -j + 0.5, 0.0, 0.3, j}) CHECK(q(m) == doctest::Approx(j * (j + 1) - m * (m - 1)));
    CHECK(q.degree == 2);
  }
}

TEST_CASE("small blocks cannot fix the polynomial") {
  const auto gen = build_mps_generators({1, 2}, 8);
  CHECK_THROWS_AS(extract_structure_polynomial(gen, mps_block(gen, 0, 2)), IllPosedFitError);
}

TEST_CASE("Casimir identity on the full interior") {
  for (int s = 1; s <= 3; ++s) {
    CAPTURE(s);
    const auto family = extract_structure_family(build_mps_generators({1, s}, 18));
    // The bivariate family reproduces the closed form at an arbitrary point.
    CHECK(family(0.41, 2.7) == doctest::Approx(oracle::q_closed(s, 2.7, 0.41)).epsilon(1e-8));
    const auto gen = build_mps_generators({1, s}, 10);
    require_pass(casimir_check(gen, family, 2 * s));
  }
}

TEST_CASE("single-sector Casimir check") {
  const auto gen = build_mps_generators({1, 2}, 12);
  const auto q = extract_structure_polynomial(gen, mps_block(gen, 1, 5));
  require_pass(casimir_check(gen, q, 4));
}

TEST_CASE("Holstein-Primakoff triple forms su(2) on each block") {
  const auto gen = build_mps_generators({1, 2}, 20);
  for (const auto& b : decompose_mps(gen).blocks) {
    if (b.dimension < 2 || b.label.two_j > 10) continue;
    const auto hp = holstein_primakoff(gen, b);
    CAPTURE(b.label.to_string());
    require_pass(verify_hp(hp));
    CHECK(hp.j == doctest::Approx(0.5 * b.label.two_j));
    // Casimir Y0^2 + (Y+Y- + Y-Y+)/2 built here independently.
    const Eigen::MatrixXcd C = hp.Y0 * hp.Y0 + 0.5 * (hp.Yplus * hp.Yminus + hp.Yminus * hp.Yplus);
    const Eigen::MatrixXcd target = hp.j * (hp.j + 1) * Eigen::MatrixXcd::Identity(b.dimension, b.dimension);
    CHECK((C - target).cwiseAbs().maxCoeff() < 1e-9);
    for (const auto& [v, phi] : hp.phi_values) CHECK(phi > 0.0);
  }
}

TEST_CASE("differential realization acts correctly on monomials") {
  const auto gen = build_mps_generators({1, 2}, 20);
  for (int two_j : {3, 6, 10}) {
    const auto b = mps_block(gen, 0, two_j);
    const auto q = extract_structure_polynomial(gen, b);
    require_pass(differential_realization_check(q, q.casimir_value, 10));
    require_pass(realization_intertwining_check(gen, b, q));

    // sum_k gamma_k m(m-1)..(m-k+1) = Q(m + R0) for every degree m.
    const auto gamma = differential_gamma(q);
    for (int m = 0; m <= 15; ++m) {
      double lhs = 0.0;
      for (std::size_t k = 0; k < gamma.size(); ++k) lhs += gamma[k] * oracle::falling(m, static_cast<int>(k));
      CHECK(lhs == doctest::Approx(q(m + q.lowest_weight)).epsilon(1e-10));
    }
    CHECK(std::abs(gamma[0]) < 1e-10);
  }
}

TEST_CASE("u(2) lift of the two-mode cluster operator") {
  const auto gen = build_mps_generators({2, 2}, 8);
  require_pass(u2_tensor_lift(gen, 4));
  CHECK_THROWS_AS(u2_tensor_lift(build_mps_generators({1, 2}, 6), 4), ValidationError);
}
