#include <cmath>
#include <map>

#include "doctest.h"
#include "polyalg/errors.hpp"
#include "polyalg/polarization.hpp"

using namespace polyalg;

namespace {

Eigen::VectorXcd basis_vector(const PolarizationOps& pol, const Occupation& occ) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(pol.basis->size());
  v(static_cast<Eigen::Index>(*pol.basis->index_of(occ))) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("quasispin relations and cluster invariance") {
  for (int n : {1, 2, 3}) {
    const auto pol = build_polarization_ops(n, n == 3 ? 4 : 6);
    for (const auto& c : verify_polarization_ops(pol, 2).checks()) {
      INFO(n << " " << c.identity_name << " " << c.max_residual);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("P0 counts helicity imbalance") {
  const auto pol = build_polarization_ops(2, 4);
  // Modes: (1,+), (1,-), (2,+), (2,-).
  const auto v = basis_vector(pol, {2, 0, 1, 1});
  CHECK(v.dot(pol.P0.matrix() * v).real() == doctest::Approx(1.0));
  CHECK(v.dot(pol.P2sq.matrix() * v).real() >= 2.0 - 1e-12);
}

TEST_CASE("biphoton cluster states are polarization scalars") {
  const auto pol = build_polarization_ops(2, 6);
  for (int kappa : {1, 2, 3}) {
    const auto psi = p_scalar_state(pol, {{{1, 2}, kappa}});
    CHECK(psi.norm() == doctest::Approx(1.0));
    const auto m = verify_p_scalar(pol, psi, 4);
    CHECK(m.moments.size() == 34);
    CHECK(m.report.all_pass());
    CHECK(m.max_abs <= 1e-10);
  }
}

TEST_CASE("a polarized control state fails the scalar test") {
  const auto pol = build_polarization_ops(2, 4);
  Eigen::VectorXcd psi = basis_vector(pol, {1, 0, 1, 0});
  const auto m = verify_p_scalar(pol, psi, 4);
  CHECK_FALSE(m.report.all_pass());
  // <P0> = 1 for two + photons.
  bool found = false;
  for (const auto& x : m.moments) {
    if (x.a0 == 1 && x.a1 == 0 && x.a2 == 0) {
      CHECK(x.value.real() == doctest::Approx(1.0));
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("cluster state input errors") {
  const auto pol = build_polarization_ops(2, 4);
  CHECK_THROWS_AS(p_scalar_state(pol, {{{2, 1}, 1}}), IndexError);
  CHECK_THROWS_AS(p_scalar_state(pol, {{{1, 2}, 0}}), DegenerateInputError);
  CHECK_THROWS_AS(p_scalar_state(pol, {{{1, 2}, 3}}), ValidationError);
  const auto one = build_polarization_ops(1, 4);
  CHECK_THROWS_AS(p_scalar_state(one, {{{1, 2}, 1}}), ValidationError);
}

TEST_CASE("polarization Hamiltonian is hermitian and conserves P^2") {
  const auto pol = build_polarization_ops(2, 4);
  PolarizationHamiltonianParams p;
  p.omega = {1.0, 0.7};
  p.omega_ij = Eigen::MatrixXcd::Zero(2, 2);
  p.omega_ij(0, 1) = Complex(0.2, 0.1);
  p.omega_ij(1, 0) = std::conj(p.omega_ij(0, 1));
  p.g = Eigen::MatrixXcd::Zero(2, 2);
  p.g(0, 1) = Complex(0.3, -0.4);
  p.Omega = {0.5, -0.2, 0.1};
  const auto H = build_polarization_hamiltonian(pol, p);
  CHECK(H.hermiticity_defect() < 1e-14);
  const auto P = interior_projector(pol.basis, 2);
  CHECK(interior_norm(commutator(H, pol.P2sq), P) < 1e-10);

  auto bad = p;
  bad.g(1, 0) = 1.0;
  CHECK_THROWS_AS(build_polarization_hamiltonian(pol, bad), ValidationError);
  bad = p;
  bad.omega = {1.0};
  CHECK_THROWS_AS(build_polarization_hamiltonian(pol, bad), ValidationError);
}

TEST_CASE("su(2) coherent rotation of a single photon") {
  const auto pol = build_polarization_ops(1, 3);
  const auto down = basis_vector(pol, {0, 1});
  for (double xi : {0.0, 0.3, 0.785, 1.2}) {
    const auto psi = su2_coherent_prep(pol, xi, down);
    CHECK(psi.norm() == doctest::Approx(1.0));
    CHECK(psi.dot(pol.P0.matrix() * psi).real() == doctest::Approx(-0.5 * std::cos(2 * xi)).epsilon(1e-12));
  }
  // Complex xi rotates about a tilted axis; the total quasispin is unchanged.
  const auto psi = su2_coherent_prep(pol, Complex(0.4, 0.9), down);
  CHECK(psi.dot(pol.P2sq.matrix() * psi).real() == doctest::Approx(0.75));
}
