#include "polyalg/dynamics.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include <boost/numeric/odeint.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "polyalg/errors.hpp"

namespace polyalg {

namespace {

std::size_t int_pow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

// Decodes a flat tensor position into 0-based indices.
std::vector<int> unflatten(std::size_t pos, int n, int s) {
  std::vector<int> idx(static_cast<std::size_t>(s));
  for (int r = s - 1; r >= 0; --r) {
    idx[static_cast<std::size_t>(r)] = static_cast<int>(pos % static_cast<std::size_t>(n));
    pos /= static_cast<std::size_t>(n);
  }
  return idx;
}

double tensor_max_abs(const std::vector<Complex>& g) {
  double m = 0.0;
  for (const auto& x : g) m = std::max(m, std::abs(x));
  return m;
}

// Number of distinct orderings of a sorted multi-index: s! / prod(mult!).
double multiplicity(const std::vector<int>& sorted) {
  double r = std::tgamma(static_cast<double>(sorted.size()) + 1.0);
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    r /= std::tgamma(static_cast<double>(j - i) + 1.0);
    i = j;
  }
  return r;
}

bool uniform_spacing(std::span<const double> t, double& dt) {
  if (t.size() < 2) return false;
  dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0.0)) return false;
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * dt) return false;
  }
  return true;
}

Complex expectation(const Eigen::VectorXcd& psi, const Eigen::MatrixXcd& op) {
  return psi.dot(op * psi);
}

}  // namespace

Complex MpsHamiltonianParams::g_at(std::span<const int> indices, int n) const {
  std::size_t pos = 0;
  for (int i : indices) pos = pos * static_cast<std::size_t>(n) + static_cast<std::size_t>(i);
  return g_tensor.at(pos);
}

std::vector<Complex> single_coupling_tensor(int n, int s, Complex g) {
  std::vector<Complex> t(int_pow(n, s), Complex(0.0));
  t[0] = g;
  return t;
}

void validate_mps_params(const PlaModelSpec& spec, const MpsHamiltonianParams& params) {
  const int n = spec.n, s = spec.s;
  if (!std::isfinite(params.omega0)) throw ValidationError("hamiltonian.omega0: not finite");
  if (params.omega.size() != 0) {
    if (params.omega.rows() != n || params.omega.cols() != n) {
      throw ValidationError("hamiltonian.omega: expected " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (!params.omega.allFinite()) throw ValidationError("hamiltonian.omega: non-finite entry");
    if ((params.omega - params.omega.adjoint()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, params.omega.cwiseAbs().maxCoeff())) {
      throw ValidationError("hamiltonian.omega: not hermitian");
    }
  }
  if (params.g_tensor.size() != int_pow(n, s)) {
    throw ValidationError("hamiltonian.g_tensor: expected " + std::to_string(int_pow(n, s)) + " entries for n=" +
                          std::to_string(n) + ", s=" + std::to_string(s));
  }
  for (const auto& x : params.g_tensor) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw ValidationError("hamiltonian.g_tensor: non-finite entry");
  }
  const double tol = 1e-12 * std::max(1.0, tensor_max_abs(params.g_tensor));
  for (std::size_t pos = 0; pos < params.g_tensor.size(); ++pos) {
    auto idx = unflatten(pos, n, s);
    std::sort(idx.begin(), idx.end());
    if (std::abs(params.g_tensor[pos] - params.g_at(idx, n)) > tol) {
      throw ValidationError("hamiltonian.g_tensor: not symmetric under index permutation");
    }
  }
  for (double d : params.delta) {
    if (!std::isfinite(d)) throw ValidationError("hamiltonian.delta: non-finite entry");
  }
}

OperatorMatrix build_mps_hamiltonian(const PlaGenerators& gen, const MpsHamiltonianParams& params) {
  validate_mps_params(gen.spec, params);
  const int n = gen.spec.n;
  auto H = OperatorMatrix::zero(gen.basis);
  if (params.omega0 != 0.0) H += params.omega0 * gen.E00;
  for (int i = 0; i < params.omega.rows(); ++i) {
    for (int j = 0; j < params.omega.cols(); ++j) {
      if (params.omega(i, j) != Complex(0.0)) H += params.omega(i, j) * gen.E[i][j];
    }
  }
  for (std::size_t m = 0; m < gen.multi_indices.size(); ++m) {
    std::vector<int> zero_based = gen.multi_indices[m];
    for (int& i : zero_based) --i;
    const Complex g = params.g_at(zero_based, n);
    if (g == Complex(0.0)) continue;
    const double mult = multiplicity(gen.multi_indices[m]);
    H += (mult * g) * gen.Vplus[m];
    H += (mult * std::conj(g)) * gen.Vminus[m];
  }
  auto power = OperatorMatrix::identity(gen.basis);
  for (std::size_t k = 0; k < params.delta.size(); ++k) {
    if (k > 0) power = power * gen.R1;
    if (params.delta[k] != 0.0) H += params.delta[k] * power;
  }
  return H.certified_hermitian();
}

RankOneReduction reduce_rank_one(const PlaModelSpec& spec, const MpsHamiltonianParams& params) {
  validate_mps_params(spec, params);
  const int n = spec.n, s = spec.s;
  const auto& g = params.g_tensor;
  const double gmax = tensor_max_abs(g);

  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
  u(0) = 1.0;
  if (gmax > 0.0) {
    const auto cols = static_cast<Eigen::Index>(int_pow(n, s - 1));
    Eigen::MatrixXcd unfolding(n, cols);
    for (int i = 0; i < n; ++i)
      for (Eigen::Index c = 0; c < cols; ++c) unfolding(i, c) = g[static_cast<std::size_t>(i * cols + c)];
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(unfolding, Eigen::ComputeThinU);
    u = svd.matrixU().col(0);
    Eigen::Index big = 0;
    u.cwiseAbs().maxCoeff(&big);
    u *= std::conj(u(big)) / std::abs(u(big));
  }

  // g~ = g contracted s times with u*, then the factorization residual.
  Complex lambda = 0.0;
  std::vector<Complex> outer(g.size());
  for (std::size_t pos = 0; pos < g.size(); ++pos) {
    Complex prod = 1.0;
    for (int i : unflatten(pos, n, s)) prod *= u(i);
    outer[pos] = prod;
    lambda += g[pos] * std::conj(prod);
  }
  double residual = 0.0;
  for (std::size_t pos = 0; pos < g.size(); ++pos) residual = std::max(residual, std::abs(g[pos] - lambda * outer[pos]));
  if (residual > 1e-10 * std::max(1.0, gmax)) {
    throw UnsupportedReductionError("reduce_rank_one: coupling tensor is not rank one (residual " +
                                    std::to_string(residual) + ")");
  }

  const Eigen::MatrixXcd u_col = u;
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(u_col);
  Eigen::MatrixXcd W = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  W.col(0) = u;

  RankOneReduction out;
  out.rotation = W;
  out.coupling = lambda;
  out.factorization_residual = residual;
  out.reduced.omega0 = params.omega0;
  out.reduced.delta = params.delta;
  out.reduced.omega = params.omega.size() ? Eigen::MatrixXcd(W.adjoint() * params.omega * W) : params.omega;
  if (out.reduced.omega.size()) out.reduced.omega = 0.5 * (out.reduced.omega + out.reduced.omega.adjoint()).eval();
  out.reduced.g_tensor = single_coupling_tensor(n, s, lambda);
  return out;
}

OperatorMatrix mode_rotation_operator(const BasisPtr& basis, const Eigen::MatrixXcd& rotation) {
  const int n = basis->mode_count() - 1;
  if (rotation.rows() != n || rotation.cols() != n) throw StructuralError("mode_rotation_operator: rotation shape mismatch");
  std::vector<SparseMatrix> bplus;
  for (int k = 0; k < n; ++k) {
    SparseMatrix b(basis->size(), basis->size());
    for (int i = 0; i < n; ++i) {
      if (rotation(i, k) != Complex(0.0)) b += rotation(i, k) * ladder_op(basis, i + 1, Ladder::create).matrix();
    }
    bplus.push_back(b);
  }
  std::vector<Eigen::Triplet<Complex>> trips;
  Occupation vac(static_cast<std::size_t>(n + 1), 0);
  for (std::size_t col = 0; col < basis->size(); ++col) {
    const auto& occ = basis->state(col);
    vac[0] = occ[0];
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis->size());
    v(static_cast<Eigen::Index>(*basis->index_of(vac))) = 1.0;
    double norm = 1.0;
    for (int k = 0; k < n; ++k) {
      for (int r = 0; r < occ[k + 1]; ++r) {
        v = bplus[k] * v;
        norm *= std::sqrt(static_cast<double>(r + 1));
      }
    }
    v /= norm;
    for (Eigen::Index row = 0; row < v.size(); ++row) {
      if (std::abs(v(row)) > 1e-15) trips.emplace_back(static_cast<int>(row), static_cast<int>(col), v(row));
    }
  }
  SparseMatrix S(basis->size(), basis->size());
  S.setFromTriplets(trips.begin(), trips.end());
  return OperatorMatrix(basis, std::move(S));
}

Report rank_one_conjugation_check(const PlaGenerators& gen, const MpsHamiltonianParams& original,
                                  const RankOneReduction& reduction) {
  Report report("rank_one_reduction");
  report.add("factorization_residual", reduction.factorization_residual, 1e-10);
  const auto H = build_mps_hamiltonian(gen, original);
  const auto Hred = build_mps_hamiltonian(gen, reduction.reduced);
  const auto S = mode_rotation_operator(gen.basis, reduction.rotation);
  const double scale = std::max(1.0, H.max_abs());
  report.add("rotation_unitary", (S.adjoint() * S - OperatorMatrix::identity(gen.basis)).max_abs(), 1e-12);
  report.add("H_equals_S_Hreduced_Sdagger", (S * Hred * S.adjoint() - H).max_abs() / scale, 1e-9);
  if (gen.basis->size() <= 3000) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> a(H.to_dense(), Eigen::EigenvaluesOnly);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> b(Hred.to_dense(), Eigen::EigenvaluesOnly);
    const double spread = std::max(1.0, a.eigenvalues().cwiseAbs().maxCoeff());
    report.add("spectra_match", (a.eigenvalues() - b.eigenvalues()).cwiseAbs().maxCoeff() / spread, 1e-9);
  }
  return report;
}

// ---------------------------------------------------------------------------

EvolutionResult evolve_block_exact(const RestrictedOperator& hamiltonian, const Eigen::VectorXcd& psi0,
                                   std::span<const double> times, std::span<const NamedMatrix> conserved) {
  if (!hamiltonian.invariant) {
    throw NonInvariantError("evolve_block_exact: Hamiltonian leaks out of the block (leakage " +
                            std::to_string(hamiltonian.leakage) + ")");
  }
  const Eigen::MatrixXcd& H = hamiltonian.matrix;
  if (H.rows() != H.cols() || H.rows() != psi0.size()) throw StructuralError("evolve_block_exact: shape mismatch");
  const double hscale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * hscale) {
    throw ValidationError("evolve_block_exact: block Hamiltonian is not hermitian");
  }
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw ValidationError("evolve_block_exact: psi0 is not normalized");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  const Eigen::VectorXcd c0 = es.eigenvectors().adjoint() * psi0;

  EvolutionResult out;
  out.times.assign(times.begin(), times.end());
  out.hamiltonian = H;
  const double e0 = expectation(psi0, H).real();
  std::vector<double> c_init;
  for (const auto& c : conserved) {
    if (c.matrix.rows() != H.rows() || c.matrix.cols() != H.cols()) throw StructuralError("evolve_block_exact: conserved '" + c.name + "' has the wrong shape");
    c_init.push_back(expectation(psi0, c.matrix).real());
    out.constants_drift.emplace_back(c.name, 0.0);
  }
  for (double t : times) {
    Eigen::VectorXcd phases(c0.size());
    for (Eigen::Index a = 0; a < c0.size(); ++a) phases(a) = std::polar(1.0, -es.eigenvalues()(a) * t) * c0(a);
    Eigen::VectorXcd psi = es.eigenvectors() * phases;
    out.norm_drift = std::max(out.norm_drift, std::abs(psi.norm() - 1.0));
    out.energy_drift = std::max(out.energy_drift, std::abs(expectation(psi, H).real() - e0) / std::max(1.0, std::abs(e0)));
    for (std::size_t k = 0; k < conserved.size(); ++k) {
      const double v = expectation(psi, conserved[k].matrix).real();
      out.constants_drift[k].second =
          std::max(out.constants_drift[k].second, std::abs(v - c_init[k]) / std::max(1.0, std::abs(c_init[k])));
    }
    out.states.push_back(std::move(psi));
  }
  return out;
}

std::vector<Complex> expectation_series(const EvolutionResult& result, const Eigen::MatrixXcd& op) {
  std::vector<Complex> v;
  v.reserve(result.states.size());
  for (const auto& psi : result.states) v.push_back(expectation(psi, op));
  return v;
}

HeisenbergSeries heisenberg_expectations(const EvolutionResult& result, std::span<const NamedMatrix> ops) {
  HeisenbergSeries out;
  out.report = Report("heisenberg");
  const Eigen::MatrixXcd& H = result.hamiltonian;
  for (const auto& op : ops) {
    if (op.matrix.rows() != H.rows() || op.matrix.cols() != H.cols()) {
      throw StructuralError("heisenberg_expectations: operator '" + op.name + "' is not restricted to the block");
    }
    out.names.push_back(op.name);
    out.values.push_back(expectation_series(result, op.matrix));
  }

  double dt = 0.0;
  const bool uniform = uniform_spacing(result.times, dt);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  const double hnorm = es.eigenvalues().size() ? es.eigenvalues().cwiseAbs().maxCoeff() : 0.0;
  if (!uniform || result.times.size() < 5 || dt * hnorm > 0.1) {
    std::clog << "warning: time grid too coarse or non-uniform for the Ehrenfest check (dt*|H| = " << dt * hnorm
              << "); check skipped\n";
    return out;
  }
  out.ehrenfest_checked = true;
  const std::size_t T = result.times.size();
  for (std::size_t k = 0; k < ops.size(); ++k) {
    // d<I>/dt = <i [H, I]>.
    const Eigen::MatrixXcd rate = Complex(0.0, 1.0) * (H * ops[k].matrix - ops[k].matrix * H);
    const double scale = std::max(1.0, rate.cwiseAbs().maxCoeff());
    const auto& f = out.values[k];
    double worst = 0.0;
    for (std::size_t t = 2; t + 2 < T; ++t) {
      const Complex deriv = (-f[t + 2] + 8.0 * f[t + 1] - 8.0 * f[t - 1] + f[t - 2]) / (12.0 * dt);
      worst = std::max(worst, std::abs(deriv - expectation(result.states[t], rate)));
    }
    out.ehrenfest_residual.push_back(worst / scale);
    out.report.add("ehrenfest_" + ops[k].name, worst / scale, 1e-6);
  }
  return out;
}

// ---------------------------------------------------------------------------

BlochParams bloch_params_from(const PlaModelSpec& spec, const MpsHamiltonianParams& params) {
  if (spec.n != 1) throw ValidationError("bloch: the classical reduction needs n = 1 (use reduce_rank_one first)");
  validate_mps_params(spec, params);
  BlochParams b;
  const double omega11 = params.omega.size() ? params.omega(0, 0).real() : 0.0;
  b.a = spec.s * omega11 - params.omega0;
  b.g = params.g_tensor[0];
  return b;
}

double bloch_energy(const BlochParams& params, const BlochState& state) {
  return params.a * state.v0 + 2.0 * (params.g * state.vplus()).real();
}

double bloch_invariant(const StructurePolynomial& q, const BlochState& state) {
  const Polynomial K = q.difference().antiderivative();
  return std::norm(state.vplus()) - K(state.v0);
}

BlochTrajectory mean_field_bloch(const StructurePolynomial& q, const BlochParams& params, const BlochState& init,
                                 std::span<const double> times, const BlochOptions& options) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 3>;
  if (times.empty()) throw ValidationError("mean_field_bloch: empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ValidationError("mean_field_bloch: times must be strictly increasing");
  }
  const Polynomial P = q.difference();
  const Polynomial K = P.antiderivative();
  const double a = params.a, gr = params.g.real(), gi = params.g.imag();

  auto rhs = [&](const State& x, State& dx, double) {
    const double p = P(x[0]);
    dx[0] = 2.0 * (gr * x[2] + gi * x[1]);
    dx[1] = -a * x[2] + gi * p;
    dx[2] = a * x[1] + gr * p;
  };

  BlochTrajectory out;
  State x{init.v0, init.v_re, init.v_im};
  double reached = times.front();
  auto observer = [&](const State& s, double t) {
    if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || !std::isfinite(s[2])) {
      throw IntegrationError("mean_field_bloch: state is no longer finite", reached);
    }
    reached = t;
    BlochState b{s[0], s[1], s[2], q.r1, 0.0};
    b.energy = bloch_energy(params, b);
    out.times.push_back(t);
    out.states.push_back(b);
  };
  try {
    if (times.size() == 1) {
      observer(x, times.front());
    } else {
      auto stepper = odeint::make_controlled(options.abs_tol, options.rel_tol, odeint::runge_kutta_dopri5<State>());
      const double dt0 = std::min(1e-3, 0.1 * (times[1] - times[0]));
      odeint::integrate_times(stepper, rhs, x, times.begin(), times.end(), dt0, observer);
    }
  } catch (const IntegrationError&) {
    throw;
  } catch (const std::exception& e) {
    throw IntegrationError(std::string("mean_field_bloch: step-size control failed: ") + e.what(), reached);
  }

  const double e0 = out.states.front().energy;
  const double i0 = std::norm(out.states.front().vplus()) - K(out.states.front().v0);
  const double iscale = std::max(1.0, std::norm(out.states.front().vplus()) + std::abs(K(out.states.front().v0)));
  for (const auto& s : out.states) {
    out.energy_drift = std::max(out.energy_drift, std::abs(s.energy - e0) / std::max(1.0, std::abs(e0)));
    out.invariant_drift = std::max(out.invariant_drift, std::abs(std::norm(s.vplus()) - K(s.v0) - i0) / iscale);
  }
  out.report = Report("mean_field_bloch");
  out.report.add("energy_conserved", out.energy_drift, 1e-8);
  out.report.add("invariant_conserved", out.invariant_drift, 1e-8);
  return out;
}

SecondOrderResult second_order_residual(const BlochTrajectory& trajectory, const StructurePolynomial& q,
                                        const BlochParams& params) {
  double dt = 0.0;
  if (!uniform_spacing(trajectory.times, dt) || trajectory.times.size() < 3) {
    throw ValidationError("second_order_residual: needs a uniform grid with at least 3 points");
  }
  const Polynomial P = q.difference();
  const double a = params.a, g2 = std::norm(params.g);
  const double E = bloch_energy(params, trajectory.states.front());
  SecondOrderResult out;
  for (std::size_t i = 1; i + 1 < trajectory.states.size(); ++i) {
    const double v = trajectory.states[i].v0;
    const double fd = (trajectory.states[i + 1].v0 - 2.0 * v + trajectory.states[i - 1].v0) / (dt * dt);
    const double rhs = a * E - a * a * v + 2.0 * g2 * P(v);
    out.max_residual = std::max(out.max_residual, std::abs(fd - rhs));
    out.max_rhs = std::max(out.max_rhs, std::abs(rhs));
  }
  out.report = Report("second_order");
  if (out.max_rhs > 1e-6) {
    out.report.add("second_order_relative", out.max_residual / out.max_rhs, 1e-4);
  } else {
    out.report.add("second_order_absolute", out.max_residual, 1e-8);
  }
  return out;
}

BlochState bloch_fixed_point(const StructurePolynomial& q, const BlochParams& params, double v0_star) {
  if (params.a == 0.0) throw ValidationError("bloch_fixed_point: detuning a must be nonzero");
  const Complex vp = -std::conj(params.g) * q.difference()(v0_star) / params.a;
  BlochState b{v0_star, vp.real(), vp.imag(), q.r1, 0.0};
  b.energy = bloch_energy(params, b);
  return b;
}

// ---------------------------------------------------------------------------

std::vector<double> uniform_grid(double t_max, int points) {
  if (points < 2 || !(t_max > 0.0)) throw ValidationError("uniform_grid: need t_max > 0 and at least 2 points");
  std::vector<double> t(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) t[static_cast<std::size_t>(i)] = t_max * i / (points - 1);
  return t;
}

namespace {

DeviationRow compare_one(const PlaGenerators& gen, const OperatorMatrix& H, const BlochParams& bp, int two_j,
                         const ComparisonOptions& options) {
  const int s = gen.spec.s;
  DeviationRow row;
  row.two_j = two_j;
  const auto block = mps_block(gen, 0, two_j);
  row.block_dimension = block.dimension;
  const double g = std::abs(bp.g);
  row.scaled_coupling = two_j > 0 ? g * std::pow(static_cast<double>(two_j), 0.5 * (s - 1)) : g;
  row.t_max = options.horizon / row.scaled_coupling;
  row.times = uniform_grid(row.t_max, options.time_points);

  const auto Hb = restrict_to_block(H, block);
  const Eigen::MatrixXcd V0 = restrict_to_block(gen.V0, block).matrix;
  const Eigen::MatrixXcd Vp = restrict_to_block(gen.Vplus[0], block).matrix;
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(block.dimension);
  psi0(block.reference_index) = 1.0;
  const auto evo = evolve_block_exact(Hb, psi0, row.times);
  for (const auto& v : expectation_series(evo, V0)) row.quantum_v0.push_back(v.real());

  if (two_j == 0) {
    // V+ annihilates a one-state block, so the classical point does not move either.
    row.classical_v0 = row.quantum_v0;
    return row;
  }
  const auto q = extract_structure_polynomial(gen, block);
  const Complex vp0 = expectation(psi0, Vp);
  BlochState init{row.quantum_v0.front(), vp0.real(), vp0.imag(), q.r1, 0.0};
  BlochOptions opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-10;
  const auto traj = mean_field_bloch(q, bp, init, row.times, opts);
  for (std::size_t t = 0; t < row.times.size(); ++t) {
    row.classical_v0.push_back(traj.states[t].v0);
    row.deviation = std::max(row.deviation, std::abs(row.quantum_v0[t] - row.classical_v0[t]) / two_j);
  }
  return row;
}

}  // namespace

std::vector<DeviationRow> compare_quantum_classical(const PlaGenerators& gen, const MpsHamiltonianParams& params,
                                                    std::span<const int> two_j_values,
                                                    const ComparisonOptions& options) {
  const BlochParams bp = bloch_params_from(gen.spec, params);
  if (std::abs(bp.g) == 0.0) throw ValidationError("compare: coupling g must be nonzero");
  for (int tj : two_j_values) {
    if (tj < 0 || gen.spec.s * tj > gen.basis->total_cutoff()) {
      throw IndexError("compare: block (k=0, 2j=" + std::to_string(tj) + ") does not fit cutoff " +
                       std::to_string(gen.basis->total_cutoff()));
    }
  }
  const auto H = build_mps_hamiltonian(gen, params);
  std::vector<DeviationRow> rows(two_j_values.size());
  std::vector<std::exception_ptr> errors(two_j_values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        rows[i] = compare_one(gen, H, bp, two_j_values[i], options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

nlohmann::ordered_json deviation_json(const std::vector<DeviationRow>& rows) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["two_j"] = r.two_j;
    j["block_dimension"] = r.block_dimension;
    j["scaled_coupling"] = r.scaled_coupling;
    j["t_max"] = r.t_max;
    j["deviation"] = r.deviation;
    arr.push_back(j);
  }
  return arr;
}

}  // namespace polyalg
