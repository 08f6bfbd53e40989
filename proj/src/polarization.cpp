#include "polyalg/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "polyalg/errors.hpp"

namespace polyalg {

namespace {

constexpr double kTol = 1e-10;

OperatorMatrix bilinear(const BasisPtr& basis, int create_mode, int annihilate_mode) {
  const LadderFactor f[] = {{create_mode, Ladder::create}, {annihilate_mode, Ladder::annihilate}};
  return monomial_op(basis, f);
}

double rel(const OperatorMatrix& a, const OperatorMatrix& b, const OperatorMatrix& P) {
  const double scale = std::max({1.0, interior_norm(a, P), interior_norm(b, P)});
  return interior_residual(a, b, P) / scale;
}

}  // namespace

PolarizationOps build_polarization_ops(int n_spatial, int cutoff, std::size_t max_states) {
  if (n_spatial < 1) throw ValidationError("n_spatial must be >= 1");
  PolarizationOps pol;
  pol.n_spatial = n_spatial;
  pol.basis = build_basis(2 * n_spatial, cutoff, max_states);
  const auto& b = pol.basis;
  using P = PolarizationOps;

  pol.P0 = diagonal_op(b, [n_spatial](const Occupation& o) {
    double v = 0.0;
    for (int i = 1; i <= n_spatial; ++i) v += o[P::mode(i, true)] - o[P::mode(i, false)];
    return Complex(0.5 * v);
  });
  pol.Pplus = OperatorMatrix::zero(b);
  for (int i = 1; i <= n_spatial; ++i) pol.Pplus += bilinear(b, P::mode(i, true), P::mode(i, false));
  pol.Pminus = pol.Pplus.adjoint();
  pol.P1 = 0.5 * (pol.Pplus + pol.Pminus);
  pol.P2 = Complex(0.0, -0.5) * (pol.Pplus - pol.Pminus);
  pol.P2sq = pol.P0 * pol.P0 + 0.5 * (pol.Pplus * pol.Pminus + pol.Pminus * pol.Pplus);

  pol.E.resize(n_spatial);
  pol.X.resize(n_spatial);
  pol.Xdag.resize(n_spatial);
  for (int i = 1; i <= n_spatial; ++i) {
    for (int j = 1; j <= n_spatial; ++j) {
      pol.E[i - 1].push_back(bilinear(b, P::mode(i, true), P::mode(j, true)) +
                             bilinear(b, P::mode(i, false), P::mode(j, false)));
      const LadderFactor first[] = {{P::mode(i, true), Ladder::annihilate}, {P::mode(j, false), Ladder::annihilate}};
      const LadderFactor second[] = {{P::mode(i, false), Ladder::annihilate}, {P::mode(j, true), Ladder::annihilate}};
      auto x = monomial_op(b, first) - monomial_op(b, second);
      pol.Xdag[i - 1].push_back(x.adjoint());
      pol.X[i - 1].push_back(std::move(x));
    }
  }
  return pol;
}

Report verify_polarization_ops(const PolarizationOps& pol, int margin) {
  Report report("polarization_ops");
  const auto P = interior_projector(pol.basis, margin);
  report.add("P0_Pplus", rel(commutator(pol.P0, pol.Pplus), pol.Pplus, P), kTol);
  report.add("P0_Pminus", rel(commutator(pol.P0, pol.Pminus), -1.0 * pol.Pminus, P), kTol);
  report.add("Pplus_Pminus", rel(commutator(pol.Pplus, pol.Pminus), 2.0 * pol.P0, P), kTol);

  const auto zero = OperatorMatrix::zero(pol.basis);
  double inv = 0.0, esq = 0.0, anti = 0.0;
  const OperatorMatrix* gens[] = {&pol.P0, &pol.Pplus, &pol.Pminus};
  for (int i = 0; i < pol.n_spatial; ++i) {
    for (int j = 0; j < pol.n_spatial; ++j) {
      for (const auto* g : gens) {
        const double sc = std::max(1.0, g->max_abs() * pol.Xdag[i][j].max_abs());
        inv = std::max(inv, interior_norm(commutator(*g, pol.Xdag[i][j]), P) / sc);
        inv = std::max(inv, interior_norm(commutator(*g, pol.X[i][j]), P) / sc);
      }
      const double sc = std::max(1.0, pol.P2sq.max_abs() * pol.E[i][j].max_abs());
      esq = std::max(esq, interior_norm(commutator(pol.P2sq, pol.E[i][j]), P) / sc);
      anti = std::max(anti, (pol.Xdag[i][j] + pol.Xdag[j][i]).max_abs());
    }
  }
  report.add("P_commutes_X", inv, kTol);
  report.add("P2_commutes_E", esq, kTol);
  report.add("Xdag_antisymmetric", anti, 0.0);
  return report;
}

Eigen::VectorXcd p_scalar_state(const PolarizationOps& pol,
                                const std::map<std::pair<int, int>, int>& powers) {
  if (pol.n_spatial < 2) throw ValidationError("p_scalar_state: requires n_spatial >= 2");
  int clusters = 0;
  for (const auto& [ij, k] : powers) {
    const auto [i, j] = ij;
    if (i < 1 || j < 1 || i > pol.n_spatial || j > pol.n_spatial || i >= j) {
      throw IndexError("p_scalar_state: cluster index (" + std::to_string(i) + "," +
                       std::to_string(j) + ") must satisfy 1 <= i < j <= n_spatial");
    }
    if (k < 0) throw ValidationError("p_scalar_state: negative cluster power");
    clusters += k;
  }
  if (clusters == 0) throw DegenerateInputError("p_scalar_state: all cluster powers are zero");
  if (2 * clusters > pol.basis->total_cutoff()) {
    throw ValidationError("p_scalar_state: " + std::to_string(2 * clusters) +
                          " photons exceed the cutoff");
  }
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(pol.basis->size());
  psi(0) = 1.0;
  for (const auto& [ij, k] : powers) {
    for (int r = 0; r < k; ++r) psi = pol.Xdag[ij.first - 1][ij.second - 1].matrix() * psi;
  }
  const double norm = psi.norm();
  if (norm < 1e-12) throw DegenerateInputError("p_scalar_state: cluster product annihilates the vacuum");
  return psi / norm;
}

nlohmann::ordered_json MomentReport::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& m : moments) {
    nlohmann::ordered_json j;
    j["a1"] = m.a1;
    j["a2"] = m.a2;
    j["a0"] = m.a0;
    j["value"] = std::abs(m.value);
    j["re"] = m.value.real();
    j["im"] = m.value.imag();
    arr.push_back(j);
  }
  return arr;
}

MomentReport verify_p_scalar(const PolarizationOps& pol, const Eigen::VectorXcd& state, int max_order) {
  MomentReport out;
  for (int order = 1; order <= max_order; ++order) {
    for (int a1 = order; a1 >= 0; --a1) {
      for (int a2 = order - a1; a2 >= 0; --a2) {
        const int a0 = order - a1 - a2;
        Eigen::VectorXcd w = state;
        for (int r = 0; r < a0; ++r) w = pol.P0.matrix() * w;
        for (int r = 0; r < a2; ++r) w = pol.P2.matrix() * w;
        for (int r = 0; r < a1; ++r) w = pol.P1.matrix() * w;
        const Complex v = state.dot(w);
        out.moments.push_back({a1, a2, a0, v});
        out.max_abs = std::max(out.max_abs, std::abs(v));
      }
    }
  }
  out.report = Report("p_scalar");
  out.report.add("moments_vanish", out.max_abs, kTol);
  return out;
}

OperatorMatrix build_polarization_hamiltonian(const PolarizationOps& pol,
                                              const PolarizationHamiltonianParams& params) {
  const int n = pol.n_spatial;
  if (static_cast<int>(params.omega.size()) != n) throw ValidationError("hamiltonian.omega: expected n_spatial entries");
  for (double w : params.omega)
    if (!std::isfinite(w)) throw ValidationError("hamiltonian.omega: non-finite entry");
  auto shape_ok = [n](const Eigen::MatrixXcd& m) { return m.size() == 0 || (m.rows() == n && m.cols() == n); };
  if (!shape_ok(params.omega_ij)) throw ValidationError("hamiltonian.omega_ij: expected n_spatial x n_spatial");
  if (!shape_ok(params.g)) throw ValidationError("hamiltonian.g: expected n_spatial x n_spatial");
  if (params.omega_ij.size() && !params.omega_ij.allFinite()) throw ValidationError("hamiltonian.omega_ij: non-finite entry");
  if (params.g.size() && !params.g.allFinite()) throw ValidationError("hamiltonian.g: non-finite entry");
  for (int i = 0; i < n && params.omega_ij.size(); ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && std::abs(params.omega_ij(i, j) - std::conj(params.omega_ij(j, i))) > 1e-14)
        throw ValidationError("hamiltonian.omega_ij: not hermitian");
  for (int i = 0; i < n && params.g.size(); ++i)
    for (int j = 0; j <= i; ++j)
      if (params.g(i, j) != Complex(0.0))
        throw ValidationError("hamiltonian.g: only entries with i < j may be nonzero");

  auto H = OperatorMatrix::zero(pol.basis);
  for (int i = 0; i < n; ++i) H += params.omega[i] * pol.E[i][i];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (params.omega_ij.size() && params.omega_ij(i, j) != Complex(0.0)) H += params.omega_ij(i, j) * pol.E[i][j];
      if (i < j && params.g.size() && params.g(i, j) != Complex(0.0)) {
        H += (2.0 * params.g(i, j)) * pol.X[i][j];
        H += (2.0 * std::conj(params.g(i, j))) * pol.Xdag[i][j];
      }
    }
  H += params.Omega[0] * pol.P1;
  H += params.Omega[1] * pol.P2;
  H += params.Omega[2] * pol.P0;
  return H.certified_hermitian();
}

Eigen::VectorXcd su2_coherent_prep(const PolarizationOps& pol, Complex xi,
                                   const Eigen::VectorXcd& reference) {
  if (reference.size() != static_cast<Eigen::Index>(pol.basis->size())) {
    throw StructuralError("su2_coherent_prep: reference vector has the wrong dimension");
  }
  const auto gen = xi * pol.Pplus - std::conj(xi) * pol.Pminus;
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(reference.size());
  for (int shell = 0; shell <= pol.basis->total_cutoff(); ++shell) {
    const auto idx = pol.basis->shell_indices(shell);
    const auto d = static_cast<Eigen::Index>(idx.size());
    Eigen::VectorXcd part(d);
    for (Eigen::Index a = 0; a < d; ++a) part(a) = reference(idx[a]);
    if (part.norm() == 0.0) continue;
    // P+- conserve the shell, so the shell block of the generator is exact.
    const auto offset = static_cast<Eigen::Index>(idx.front());
    Eigen::MatrixXcd g = Eigen::MatrixXcd(gen.matrix().block(offset, offset, d, d));
    const Eigen::VectorXcd rotated = g.exp() * part;
    for (Eigen::Index a = 0; a < d; ++a) out(idx[a]) = rotated(a);
  }
  const double drift = std::abs(out.norm() - reference.norm());
  if (drift > 1e-10 * std::max(1.0, reference.norm())) {
    throw ModelViolationError("su2_coherent_prep: norm drift " + std::to_string(drift));
  }
  return out;
}

}  // namespace polyalg
