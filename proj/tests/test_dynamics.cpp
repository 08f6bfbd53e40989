#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "polyalg/dynamics.hpp"
#include "polyalg/errors.hpp"

using namespace polyalg;

namespace {

MpsHamiltonianParams coupling_only(int n, int s, Complex g) {
  MpsHamiltonianParams p;
  p.omega = Eigen::MatrixXcd::Zero(n, n);
  p.g_tensor = single_coupling_tensor(n, s, g);
  return p;
}

// Linear interpolation of the k-th upward zero crossing of Im v+.
double upward_crossing(const BlochTrajectory& tr, int k) {
  int seen = 0;
  for (std::size_t i = 1; i < tr.states.size(); ++i) {
    const double a = tr.states[i - 1].v_im, b = tr.states[i].v_im;
    if (a < 0.0 && b >= 0.0 && ++seen == k) return tr.times[i - 1] + (tr.times[i] - tr.times[i - 1]) * a / (a - b);
  }
  return std::nan("");
}

}  // namespace

TEST_CASE("single coupling Hamiltonian is g (V+ + V-)") {
  const auto gen = build_mps_generators({1, 2}, 8);
  const auto H = build_mps_hamiltonian(gen, coupling_only(1, 2, 0.7));
  CHECK((H - Complex(0.7) * (gen.Vplus[0] + gen.Vminus[0])).max_abs() < 1e-15);
  CHECK(H.hermitian_flag().value_or(false));
}

TEST_CASE("Hamiltonian symmetries for random parameters") {
  const int n = 2, s = 2;
  const auto gen = build_mps_generators({n, s}, 8);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  MpsHamiltonianParams p;
  p.omega0 = nd(rng);
  p.omega = Eigen::MatrixXcd::Zero(n, n);
  p.omega(0, 0) = nd(rng);
  p.omega(1, 1) = nd(rng);
  p.omega(0, 1) = Complex(nd(rng), nd(rng));
  p.omega(1, 0) = std::conj(p.omega(0, 1));
  const Complex g00(nd(rng), nd(rng)), g01(nd(rng), nd(rng)), g11(nd(rng), nd(rng));
  p.g_tensor = {g00, g01, g01, g11};
  p.delta = {0.3, -0.2};
  const auto H = build_mps_hamiltonian(gen, p);
  const auto P = interior_projector(gen.basis, 2 * s);
  CHECK(interior_norm(commutator(H, gen.R1), P) < 1e-12 * std::max(1.0, H.max_abs() * gen.R1.max_abs()));
  // Every term changes the scattered quantum number by 0 or +-s.
  for (int c = 0; c < H.matrix().outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(H.matrix(), c); it; ++it) {
      const auto& a = gen.basis->state(static_cast<std::size_t>(it.row()));
      const auto& b = gen.basis->state(static_cast<std::size_t>(c));
      CHECK((a[1] + a[2] - b[1] - b[2]) % s == 0);
    }
  }
  p.g_tensor = {g00, g01, g01 + 0.1, g11};
  CHECK_THROWS_AS(build_mps_hamiltonian(gen, p), ValidationError);
}

TEST_CASE("rank-one reduction of a two-mode coupling") {
  const int n = 2, s = 2;
  const Complex g(0.8, 0.3);
  MpsHamiltonianParams p = coupling_only(n, s, 0.0);
  p.omega0 = 0.4;
  p.omega(0, 0) = 1.0;
  p.omega(1, 1) = 0.6;
  // c = (1, 1)/sqrt2, g_ij = g c_i c_j.
  p.g_tensor = {g / 2.0, g / 2.0, g / 2.0, g / 2.0};
  const auto red = reduce_rank_one({n, s}, p);
  CHECK(std::abs(red.coupling - g) < 1e-12);
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(red.rotation(0, 0) - h) < 1e-12);
  CHECK(std::abs(red.rotation(1, 0) - h) < 1e-12);
  CHECK((red.rotation.adjoint() * red.rotation - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  const auto gen = build_mps_generators({n, s}, 8);
  for (const auto& c : rank_one_conjugation_check(gen, p, red).checks()) {
    INFO(c.identity_name << " " << c.max_residual);
    CHECK(c.pass);
  }
  // Independent spectrum comparison on the dense matrices.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(build_mps_hamiltonian(gen, p).to_dense());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e2(build_mps_hamiltonian(gen, red.reduced).to_dense());
  CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("rank-one reduction is trivial for one mode and refuses general tensors") {
  const auto one = reduce_rank_one({1, 3}, coupling_only(1, 3, 0.5));
  CHECK(std::abs(one.rotation(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(one.coupling - 0.5) < 1e-15);

  MpsHamiltonianParams p = coupling_only(2, 2, 0.0);
  p.g_tensor = {1.0, 0.3, 0.3, -0.7};
  CHECK_THROWS_AS(reduce_rank_one({2, 2}, p), UnsupportedReductionError);
}

TEST_CASE("two-state block oscillates with |h12| = sqrt6 g") {
  const double g = 0.35;
  const auto gen = build_mps_generators({1, 2}, 6);
  const auto H = build_mps_hamiltonian(gen, coupling_only(1, 2, g));
  const auto b = mps_block(gen, 1, 1);
  const auto Hb = restrict_to_block(H, b);
  CHECK(std::abs(std::abs(Hb.matrix(1, 0)) - std::sqrt(6.0) * g) < 1e-14);
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(2);
  psi0(0) = 1.0;
  const auto times = uniform_grid(4.0, 4001);
  const NamedMatrix r1{"R1", restrict_to_block(gen.R1, b).matrix};
  const auto evo = evolve_block_exact(Hb, psi0, times, std::span<const NamedMatrix>(&r1, 1));
  CHECK((evo.states.front() - psi0).norm() < 1e-15);
  CHECK(evo.norm_drift < 1e-10);
  CHECK(evo.energy_drift < 1e-10);
  CHECK(evo.constants_drift[0].second < 1e-10);

  const std::vector<NamedMatrix> ops = {{"V0", restrict_to_block(gen.V0, b).matrix},
                                        {"Vplus", restrict_to_block(gen.Vplus[0], b).matrix},
                                        {"Vminus", restrict_to_block(gen.Vminus[0], b).matrix},
                                        {"R1", r1.matrix},
                                        {"H", Hb.matrix}};
  const auto series = heisenberg_expectations(evo, ops);
  REQUIRE(series.ehrenfest_checked);
  CHECK(series.report.all_pass());
  const double vlow = (1.0 - 1.0) / 3.0;
  for (std::size_t t = 0; t < times.size(); ++t) {
    const double s = std::sin(std::sqrt(6.0) * g * times[t]);
    CHECK(std::abs(series.values[0][t].real() - (vlow + s * s)) < 1e-8);
    CHECK(std::abs(series.values[3][t] - series.values[3][0]) < 1e-12);
    CHECK(std::abs(series.values[4][t] - series.values[4][0]) < 1e-12);
  }
}

TEST_CASE("Ehrenfest residual on the three-state block") {
  const auto gen = build_mps_generators({1, 2}, 6);
  MpsHamiltonianParams p = coupling_only(1, 2, Complex(0.6, -0.2));
  p.omega0 = 0.3;
  p.omega(0, 0) = 0.9;
  const auto H = build_mps_hamiltonian(gen, p);
  const auto b = mps_block(gen, 0, 2);
  const auto Hb = restrict_to_block(H, b);
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(3);
  psi0(0) = 1.0;
  const auto evo = evolve_block_exact(Hb, psi0, uniform_grid(3.0, 3001));
  const std::vector<NamedMatrix> ops = {{"V0", restrict_to_block(gen.V0, b).matrix},
                                        {"Vplus", restrict_to_block(gen.Vplus[0], b).matrix},
                                        {"Vminus", restrict_to_block(gen.Vminus[0], b).matrix}};
  const auto series = heisenberg_expectations(evo, ops);
  REQUIRE(series.ehrenfest_checked);
  for (double r : series.ehrenfest_residual) CHECK(r < 1e-6);

  // A coarse grid skips the check.
  const auto coarse = evolve_block_exact(Hb, psi0, uniform_grid(30.0, 11));
  CHECK_FALSE(heisenberg_expectations(coarse, ops).ehrenfest_checked);
}

TEST_CASE("diagonal Hamiltonians only rotate phases") {
  RestrictedOperator H;
  H.matrix = Eigen::MatrixXcd::Zero(3, 3);
  H.matrix.diagonal() << 0.5, -1.0, 2.0;
  Eigen::VectorXcd psi0(3);
  psi0 << 0.6, Complex(0.0, 0.64), 0.48;
  const auto evo = evolve_block_exact(H, psi0, uniform_grid(7.0, 50));
  for (const auto& psi : evo.states)
    for (int i = 0; i < 3; ++i) CHECK(std::abs(std::abs(psi(i)) - std::abs(psi0(i))) < 1e-14);
}

TEST_CASE("evolution input errors") {
  const auto gen = build_mps_generators({1, 2}, 6);
  const auto b = mps_block(gen, 0, 2);
  const auto leaking = restrict_to_block(ladder_op(gen.basis, 1, Ladder::create) + ladder_op(gen.basis, 1, Ladder::annihilate), b);
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(3);
  psi0(0) = 1.0;
  const auto t = uniform_grid(1.0, 5);
  CHECK_THROWS_AS(evolve_block_exact(leaking, psi0, t), NonInvariantError);
  auto ok = restrict_to_block(build_mps_hamiltonian(gen, coupling_only(1, 2, 1.0)), b);
  CHECK_THROWS_AS(evolve_block_exact(ok, 2.0 * psi0, t), ValidationError);
  ok.matrix(0, 1) += 0.1;
  CHECK_THROWS_AS(evolve_block_exact(ok, psi0, t), ValidationError);
}

// -- mean field ---------------------------------------------------------------

TEST_CASE("decoupled limit: v0 fixed, v+ rotating at a") {
  const auto gen = build_mps_generators({1, 2}, 12);
  const auto q = extract_structure_polynomial(gen, mps_block(gen, 0, 5));
  const BlochParams bp{1.7, 0.0};
  const BlochState init{0.4, 0.3, -0.2, q.r1, 0.0};
  const auto times = uniform_grid(10.0, 2001);
  const auto tr = mean_field_bloch(q, bp, init, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Complex expect = init.vplus() * std::polar(1.0, bp.a * times[i]);
    CHECK(tr.states[i].v0 == init.v0);
    CHECK(std::abs(tr.states[i].vplus() - expect) < 1e-8);
  }
}

TEST_CASE("s = 1 gives closed circles on the Bloch sphere") {
  const auto gen = build_mps_generators({1, 1}, 8);
  const auto q = extract_structure_polynomial(gen, mps_block(gen, 0, 4));
  const BlochParams bp{0.7, Complex(0.3, 0.4)};
  const BlochState init{-1.2, 0.5, 0.9, q.r1, 0.0};
  const double period = 2.0 * std::numbers::pi / std::sqrt(bp.a * bp.a + 4.0 * std::norm(bp.g));
  BlochOptions tight;
  tight.abs_tol = 1e-12;
  tight.rel_tol = 1e-12;
  const auto tr = mean_field_bloch(q, bp, init, uniform_grid(period, 1001), tight);
  const auto& end = tr.states.back();
  CHECK(std::abs(end.v0 - init.v0) < 1e-8);
  CHECK(std::abs(end.vplus() - init.vplus()) < 1e-8);
  const double r2 = init.v0 * init.v0 + std::norm(init.vplus());
  for (const auto& s : tr.states) CHECK(std::abs(s.v0 * s.v0 + std::norm(s.vplus()) - r2) < 1e-8);
  CHECK(tr.report.all_pass());
}

TEST_CASE("s = 2 oscillation period matches the quadrature") {
  const double g = 0.8;
  const auto gen = build_mps_generators({1, 2}, 20);
  const auto q = extract_structure_polynomial(gen, mps_block(gen, 0, 10));
  const BlochParams bp{0.0, g};
  const BlochState init{q.lowest_weight, 0.0, 0.0, q.r1, 0.0};
  const auto K = q.difference().antiderivative().coeffs();
  const double period = oracle::bloch_period(K, g, init.v0);
  const auto tr = mean_field_bloch(q, bp, init, uniform_grid(2.5 * period, 50001));
  CHECK(tr.report.all_pass());
  const double measured = upward_crossing(tr, 1);
  CHECK(std::abs(measured - period) <= 1e-4 * period);
  CHECK(std::abs(upward_crossing(tr, 2) - 2.0 * period) <= 1e-4 * period);
  const auto so = second_order_residual(tr, q, bp);
  CHECK(so.report.all_pass());
  CHECK(so.max_residual <= 1e-4 * so.max_rhs);
}

TEST_CASE("detuned trajectory conserves both first integrals") {
  const auto gen = build_mps_generators({1, 2}, 16);
  const auto q = extract_structure_polynomial(gen, mps_block(gen, 1, 7));
  const BlochParams bp{0.9, Complex(0.5, -0.3)};
  const BlochState init{q.lowest_weight + 1.5, 0.4, 1.1, q.r1, 0.0};
  const auto tr = mean_field_bloch(q, bp, init, uniform_grid(8.0, 8001));
  CHECK(tr.energy_drift < 1e-8);
  CHECK(tr.invariant_drift < 1e-8);
  const auto so = second_order_residual(tr, q, bp);
  CHECK(so.max_residual <= 1e-4 * so.max_rhs);
}

TEST_CASE("classical fixed point stays put") {
  const auto gen = build_mps_generators({1, 2}, 16);
  const auto q = extract_structure_polynomial(gen, mps_block(gen, 0, 8));
  const BlochParams bp{1.3, Complex(0.5, 0.2)};
  const auto fp = bloch_fixed_point(q, bp, q.lowest_weight + 2.5);
  // dv+/dt = i a v+ + i g* P(v0) vanishes by construction.
  const Complex rate = Complex(0, bp.a) * fp.vplus() + Complex(0, 1) * std::conj(bp.g) * q.difference()(fp.v0);
  CHECK(std::abs(rate) < 1e-12);
  const auto tr = mean_field_bloch(q, bp, fp, uniform_grid(5.0, 1001));
  for (const auto& s : tr.states) CHECK(std::abs(s.v0 - fp.v0) < 1e-10);
  const auto so = second_order_residual(tr, q, bp);
  CHECK(so.max_residual <= 1e-8);
  CHECK(so.report.all_pass());
  CHECK_THROWS_AS(bloch_fixed_point(q, BlochParams{0.0, 1.0}, 0.0), ValidationError);
}

TEST_CASE("runaway trajectories report the reached time") {
  // For s = 2 and v0 far below the block, dv0/dt grows like v0^2 and v0 escapes in finite time.
  const auto gen = build_mps_generators({1, 2}, 10);
  const auto q = extract_structure_polynomial(gen, mps_block(gen, 0, 5));
  const BlochParams bp{0.0, 1.0};
  const BlochState init{-40.0, 0.0, 0.0, q.r1, 0.0};
  try {
    mean_field_bloch(q, bp, init, uniform_grid(50.0, 101));
    FAIL("expected an integration failure");
  } catch (const IntegrationError& e) {
    CHECK(e.reached_time() >= 0.0);
    CHECK(e.reached_time() < 50.0);
  }
}

// -- quantum vs classical -----------------------------------------------------

TEST_CASE("quantum-classical deviation shrinks with block size") {
  const auto gen = build_mps_generators({1, 2}, 80);
  const auto p = coupling_only(1, 2, 1.0);
  const int two_j[] = {0, 4, 10, 20, 40};
  ComparisonOptions opts;
  opts.threads = 3;
  const auto rows = compare_quantum_classical(gen, p, two_j, opts);
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].deviation == 0.0);
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(rows[i].deviation < rows[i - 1].deviation);
  // Serial and threaded runs agree exactly.
  opts.threads = 1;
  const auto serial = compare_quantum_classical(gen, p, two_j, opts);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(serial[i].deviation == rows[i].deviation);
}

TEST_CASE("deviation vanishes at short horizons") {
  const auto gen = build_mps_generators({1, 2}, 20);
  const auto p = coupling_only(1, 2, 1.0);
  const int two_j[] = {10};
  ComparisonOptions opts;
  opts.horizon = 0.1;
  const double d1 = compare_quantum_classical(gen, p, two_j, opts)[0].deviation;
  opts.horizon = 0.05;
  const double d2 = compare_quantum_classical(gen, p, two_j, opts)[0].deviation;
  CHECK(d2 < d1);
  CHECK(d1 / d2 >= 4.0);
  const int too_big[] = {11};
  CHECK_THROWS_AS(compare_quantum_classical(gen, p, too_big, opts), IndexError);
}
