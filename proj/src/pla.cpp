#include "polyalg/pla.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "polyalg/errors.hpp"

namespace polyalg {

namespace {

constexpr double kIdentityTol = 1e-10;
constexpr double kPolyTol = 1e-9;

void sorted_multi_indices(int n, int s, std::vector<int>& current, int start,
                          std::vector<std::vector<int>>& out) {
  if (static_cast<int>(current.size()) == s) {
    out.push_back(current);
    return;
  }
  for (int i = start; i <= n; ++i) {
    current.push_back(i);
    sorted_multi_indices(n, s, current, i, out);
    current.pop_back();
  }
}

/// |(A - B)P| / max(1, |AP|, |BP|).
double scaled_residual(const OperatorMatrix& a, const OperatorMatrix& b, const OperatorMatrix& p) {
  const double scale = std::max({1.0, interior_norm(a, p), interior_norm(b, p)});
  return interior_residual(a, b, p) / scale;
}

double scaled_norm(const OperatorMatrix& a, const OperatorMatrix& p, double scale) {
  return interior_norm(a, p) / std::max(1.0, scale);
}

void require_chain_block(const PlaGenerators& gen, const BlockSubspace& block, const char* what) {
  if (gen.spec.n != 1) throw ValidationError(std::string(what) + ": requires n = 1 generators");
  if (block.label.kind != BlockKind::mps) {
    throw ValidationError(std::string(what) + ": requires an mps chain block");
  }
  if (!block.basis->same_space(*gen.basis)) {
    throw StructuralError(std::string(what) + ": block and generators use different Fock spaces");
  }
}

/// Diagonal of a restricted operator after checking that it is diagonal and invariant.
Eigen::VectorXd block_diagonal(const OperatorMatrix& op, const BlockSubspace& block,
                               const char* what) {
  const auto r = restrict_to_block(op, block);
  const double scale = std::max(1.0, r.matrix.cwiseAbs().maxCoeff());
  Eigen::MatrixXcd off = r.matrix;
  off.diagonal().setZero();
  const double off_max = off.size() ? off.cwiseAbs().maxCoeff() : 0.0;
  if (!r.invariant || off_max > kIdentityTol * scale) {
    throw ModelViolationError(std::string(what) + ": operator is not diagonal on block " +
                              block.label.to_string());
  }
  return r.matrix.diagonal().real();
}

std::vector<std::vector<double>> stirling_second_kind(int max_order) {
  std::vector<std::vector<double>> s(max_order + 1, std::vector<double>(max_order + 1, 0.0));
  s[0][0] = 1.0;
  for (int l = 1; l <= max_order; ++l) {
    for (int k = 1; k <= l; ++k) s[l][k] = k * s[l - 1][k] + s[l - 1][k - 1];
  }
  return s;
}

double falling_factorial(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (x - i);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t PlaGenerators::multi_index_position(std::span<const int> indices) const {
  std::vector<int> key(indices.begin(), indices.end());
  std::sort(key.begin(), key.end());
  if (static_cast<int>(key.size()) != spec.s || key.front() < 1 || key.back() > spec.n) {
    throw IndexError("cluster index tuple has wrong length or out-of-range entries");
  }
  const auto it = std::lower_bound(multi_indices.begin(), multi_indices.end(), key);
  return static_cast<std::size_t>(it - multi_indices.begin());
}

const OperatorMatrix& PlaGenerators::vplus(std::span<const int> indices) const {
  return Vplus[multi_index_position(indices)];
}

const OperatorMatrix& PlaGenerators::vminus(std::span<const int> indices) const {
  return Vminus[multi_index_position(indices)];
}

PlaGenerators build_mps_generators(const PlaModelSpec& spec, int cutoff, std::size_t max_states) {
  if (spec.n < 1) throw ValidationError("n must be >= 1");
  if (spec.s < 1) throw ValidationError("s must be >= 1");
  if (cutoff < spec.s) throw ValidationError("cutoff must be >= s");

  PlaGenerators gen;
  gen.spec = spec;
  gen.basis = build_basis(spec.n + 1, cutoff, max_states);
  const auto& basis = gen.basis;
  const int n = spec.n;
  const double s = spec.s;

  gen.E.resize(n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const LadderFactor f[] = {{i, Ladder::create}, {j, Ladder::annihilate}};
      gen.E[i - 1].push_back(monomial_op(basis, f));
    }
  }
  gen.E00 = number_op(basis, 0);
  auto scattered = [n](const Occupation& o) {
    int total = 0;
    for (int i = 1; i <= n; ++i) total += o[i];
    return static_cast<double>(total);
  };
  gen.N = diagonal_op(basis, [&](const Occupation& o) { return Complex(scattered(o)); });
  gen.V0 = diagonal_op(basis, [&](const Occupation& o) {
    return Complex((scattered(o) - o[0]) / (s + 1.0));
  });
  gen.R1 = diagonal_op(basis, [&](const Occupation& o) {
    return Complex((scattered(o) + s * o[0]) / (s + 1.0));
  });

  std::vector<int> current;
  sorted_multi_indices(n, spec.s, current, 1, gen.multi_indices);
  for (const auto& idx : gen.multi_indices) {
    std::vector<LadderFactor> factors;
    for (int i : idx) factors.push_back({i, Ladder::create});
    factors.push_back({0, Ladder::annihilate});
    auto vp = monomial_op(basis, factors);
    gen.Vminus.push_back(vp.adjoint());
    gen.Vplus.push_back(std::move(vp));
  }
  return gen;
}

// ---------------------------------------------------------------------------

Report verify_pla_cr(const PlaGenerators& gen, int margin) {
  const int s = gen.spec.s;
  const int n = gen.spec.n;
  if (margin < 2 * s) throw ValidationError("verify_pla_cr: margin must be >= 2s");
  if (margin > gen.basis->total_cutoff()) throw ValidationError("verify_pla_cr: margin exceeds cutoff");

  Report report("pla_cr");
  const auto P = interior_projector(gen.basis, margin);
  const auto zero = OperatorMatrix::zero(gen.basis);

  // [E_ij, E_kl] = delta_jk E_il - delta_il E_kj
  double ee = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          OperatorMatrix expected = zero;
          if (j == k) expected += gen.E[i][l];
          if (i == l) expected -= gen.E[k][j];
          ee = std::max(ee, scaled_residual(commutator(gen.E[i][j], gen.E[k][l]), expected, P));
        }
  report.add("E_E_closure", ee, kIdentityTol);

  // [E_ij, V+_I] = sum_p delta_{j,I_p} V+_{I with I_p -> i}; conjugate pattern for V-.
  double ev = 0.0, evm = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j)
      for (std::size_t m = 0; m < gen.multi_indices.size(); ++m) {
        const auto& idx = gen.multi_indices[m];
        OperatorMatrix plus = zero, minus = zero;
        for (int p = 0; p < s; ++p) {
          if (idx[p] == j) {
            auto repl = idx;
            repl[p] = i;
            plus += gen.vplus(repl);
          }
          if (idx[p] == i) {
            auto repl = idx;
            repl[p] = j;
            minus -= gen.vminus(repl);
          }
        }
        const auto& Eij = gen.E[i - 1][j - 1];
        ev = std::max(ev, scaled_residual(commutator(Eij, gen.Vplus[m]), plus, P));
        evm = std::max(evm, scaled_residual(commutator(Eij, gen.Vminus[m]), minus, P));
      }
  report.add("E_Vplus_tensor", ev, kIdentityTol);
  report.add("E_Vminus_tensor", evm, kIdentityTol);

  // [V-_I, V+_J] lies in the enveloping algebra of the Cartan part and the center.
  double cr1 = 0.0, cv0 = 0.0, diag = 0.0;
  for (const auto& vm : gen.Vminus)
    for (const auto& vp : gen.Vplus) {
      const auto c = commutator(vm, vp);
      const double scale = std::max(1.0, interior_norm(c, P));
      cr1 = std::max(cr1, interior_norm(commutator(c, gen.R1), P) / (scale * std::max(1.0, gen.R1.max_abs())));
      cv0 = std::max(cv0, interior_norm(commutator(c, gen.V0), P) / (scale * std::max(1.0, gen.V0.max_abs())));
      if (n == 1) {
        OperatorMatrix cp = c * P;
        SparseMatrix off = cp.matrix();
        off.prune([](Eigen::Index r, Eigen::Index col, const Complex&) { return r != col; });
        diag = std::max(diag, OperatorMatrix(gen.basis, off).max_abs() / scale);
      }
    }
  report.add("Vminus_Vplus_commutes_R1", cr1, kIdentityTol);
  report.add("Vminus_Vplus_commutes_V0", cv0, kIdentityTol);
  if (n == 1) report.add("Vminus_Vplus_diagonal", diag, kIdentityTol);

  // Generator invariants.
  double r1c = 0.0;
  for (const auto& row : gen.E)
    for (const auto& e : row) r1c = std::max(r1c, scaled_norm(commutator(gen.R1, e), P, gen.R1.max_abs() * e.max_abs()));
  for (std::size_t m = 0; m < gen.Vplus.size(); ++m) {
    r1c = std::max(r1c, scaled_norm(commutator(gen.R1, gen.Vplus[m]), P, gen.R1.max_abs() * gen.Vplus[m].max_abs()));
    r1c = std::max(r1c, scaled_norm(commutator(gen.R1, gen.Vminus[m]), P, gen.R1.max_abs() * gen.Vminus[m].max_abs()));
  }
  report.add("R1_central", r1c, kIdentityTol);

  double v0p = 0.0, v0m = 0.0, adj = 0.0;
  for (std::size_t m = 0; m < gen.Vplus.size(); ++m) {
    v0p = std::max(v0p, scaled_residual(commutator(gen.V0, gen.Vplus[m]), gen.Vplus[m], P));
    v0m = std::max(v0m, scaled_residual(commutator(gen.V0, gen.Vminus[m]), -1.0 * gen.Vminus[m], P));
    std::vector<LadderFactor> factors;
    for (int i : gen.multi_indices[m]) factors.push_back({i, Ladder::annihilate});
    factors.push_back({0, Ladder::create});
    adj = std::max(adj, scaled_residual(gen.Vminus[m], monomial_op(gen.basis, factors), P));
  }
  report.add("V0_Vplus_raising", v0p, kIdentityTol);
  report.add("V0_Vminus_lowering", v0m, kIdentityTol);
  report.add("Vminus_is_adjoint_monomial", adj, kIdentityTol);

  // Block diagonality of [V-, V+] across the chain decomposition.
  if (n == 1) {
    const auto dec = decompose_mps(gen);
    const auto c = commutator(gen.Vminus[0], gen.Vplus[0]);
    double leak = 0.0;
    for (const auto& b : dec.blocks) {
      const auto r = restrict_to_block(c, b);
      leak = std::max(leak, r.leakage / std::max(1.0, r.matrix.cwiseAbs().maxCoeff()));
    }
    report.add("Vminus_Vplus_block_diagonal", leak, kIdentityTol);
  }
  return report;
}

// ---------------------------------------------------------------------------

nlohmann::ordered_json StructurePolynomial::to_json() const {
  nlohmann::ordered_json j;
  j["s"] = s;
  j["degree"] = degree;
  j["r1"] = r1;
  j["lowest_weight"] = lowest_weight;
  j["block_dimension"] = block_dimension;
  j["casimir_value"] = casimir_value;
  j["reproduction_residual"] = reproduction_residual;
  j["coefficients"] = q.coeffs();
  return j;
}

StructurePolynomial extract_structure_polynomial(const PlaGenerators& gen,
                                                 const BlockSubspace& block) {
  require_chain_block(gen, block, "extract_structure_polynomial");
  const int s = gen.spec.s;
  if (block.dimension < s + 2) {
    throw IllPosedFitError("extract_structure_polynomial: block " + block.label.to_string() +
                           " has dimension " + std::to_string(block.dimension) + " < s+2 = " +
                           std::to_string(s + 2));
  }
  const auto vpvm = gen.Vplus[0] * gen.Vminus[0];
  const Eigen::VectorXd values = block_diagonal(vpvm, block, "extract_structure_polynomial");
  const Eigen::VectorXd weights = block_diagonal(gen.V0, block, "extract_structure_polynomial");
  const Eigen::VectorXd r1 = block_diagonal(gen.R1, block, "extract_structure_polynomial");

  std::vector<double> nodes(weights.data(), weights.data() + s + 2);
  std::vector<double> vals(values.data(), values.data() + s + 2);
  StructurePolynomial out;
  out.s = s;
  out.q = interpolate(nodes, vals);
  out.degree = out.q.degree(1e-9);
  out.r1 = r1.mean();
  out.lowest_weight = weights.minCoeff();
  out.block_dimension = block.dimension;

  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  double mean = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double c = values(i) - out.q(weights(i));
    mean += c;
    if (i >= s + 2) out.reproduction_residual = std::max(out.reproduction_residual, std::abs(c) / scale);
  }
  out.casimir_value = mean / static_cast<double>(weights.size());
  return out;
}

Polynomial StructurePolynomialFamily::at(double r1) const {
  std::vector<double> c;
  c.reserve(coeff_.size());
  for (const auto& p : coeff_) c.push_back(p(r1));
  return Polynomial(std::move(c));
}

StructurePolynomialFamily fit_structure_family(std::span<const StructurePolynomial> samples) {
  if (samples.empty()) throw IllPosedFitError("fit_structure_family: no samples");
  const int s = samples.front().s;
  if (static_cast<int>(samples.size()) < s + 2) {
    throw IllPosedFitError("fit_structure_family: need at least s+2 = " + std::to_string(s + 2) +
                           " blocks, got " + std::to_string(samples.size()));
  }
  std::vector<double> r1;
  for (const auto& q : samples) r1.push_back(q.r1);
  std::vector<Polynomial> coeff;
  for (int k = 0; k <= s + 1; ++k) {
    std::vector<double> ck;
    for (const auto& q : samples) {
      const auto& c = q.q.coeffs();
      ck.push_back(k < static_cast<int>(c.size()) ? c[k] : 0.0);
    }
    coeff.push_back(fit_least_squares(r1, ck, s + 1 - k));
  }
  return StructurePolynomialFamily(s, std::move(coeff));
}

StructurePolynomialFamily extract_structure_family(const PlaGenerators& gen) {
  const auto dec = decompose_mps(gen);
  std::vector<StructurePolynomial> samples;
  for (const auto& b : dec.blocks) {
    if (b.dimension >= gen.spec.s + 2) samples.push_back(extract_structure_polynomial(gen, b));
  }
  return fit_structure_family(samples);
}

namespace {

Report casimir_report(const PlaGenerators& gen, const OperatorMatrix& q_op, const OperatorMatrix& P) {
  Report report("casimir");
  const auto vpvm = gen.Vplus[0] * gen.Vminus[0];
  const auto C = vpvm - q_op;
  const double scale = std::max(1.0, interior_norm(vpvm, P));
  report.add("casimir_vanishes", interior_norm(C, P) / scale, kPolyTol);

  const OperatorMatrix* ops[] = {&gen.V0, &gen.Vplus[0], &gen.Vminus[0]};
  const char* names[] = {"casimir_commutes_V0", "casimir_commutes_Vplus", "casimir_commutes_Vminus"};
  for (int a = 0; a < 3; ++a) {
    const double sc = scale * std::max(1.0, ops[a]->max_abs());
    report.add(names[a], interior_norm(commutator(C, *ops[a]), P) / sc, kPolyTol);
  }
  // The vacuum is index 0 in graded-lex order.
  double vac = 0.0;
  for (SparseMatrix::InnerIterator it(C.matrix(), 0); it; ++it) vac = std::max(vac, std::abs(it.value()));
  report.add("casimir_vacuum", vac / scale, kPolyTol);
  return report;
}

}  // namespace

Report casimir_check(const PlaGenerators& gen, const StructurePolynomialFamily& family, int margin) {
  if (gen.spec.n != 1) throw ValidationError("casimir_check: requires n = 1 generators");
  if (family.s() != gen.spec.s) throw ValidationError("casimir_check: family built for a different s");
  const double s = gen.spec.s;
  const auto P = interior_projector(gen.basis, margin);
  const auto q_op = diagonal_op(gen.basis, [&](const Occupation& o) {
    const double v0 = (o[1] - o[0]) / (s + 1.0);
    const double r1 = (o[1] + s * o[0]) / (s + 1.0);
    return Complex(family(v0, r1));
  });
  return casimir_report(gen, q_op, P);
}

Report casimir_check(const PlaGenerators& gen, const StructurePolynomial& q, int margin) {
  if (gen.spec.n != 1) throw ValidationError("casimir_check: requires n = 1 generators");
  if (q.s != gen.spec.s) throw ValidationError("casimir_check: polynomial built for a different s");
  const double s = gen.spec.s;
  auto in_sector = [&](const Occupation& o) {
    return std::abs((o[1] + s * o[0]) / (s + 1.0) - q.r1) < 1e-9;
  };
  const auto P = interior_projector(gen.basis, margin) *
                 diagonal_op(gen.basis, [&](const Occupation& o) { return Complex(in_sector(o) ? 1.0 : 0.0); });
  const auto q_op = diagonal_op(gen.basis, [&](const Occupation& o) {
    return in_sector(o) ? Complex(q((o[1] - o[0]) / (s + 1.0))) : Complex(0.0);
  });
  return casimir_report(gen, q_op, P);
}

Report commutator_polynomial_check(const PlaGenerators& gen, const BlockSubspace& block,
                                   const StructurePolynomial& q) {
  require_chain_block(gen, block, "commutator_polynomial_check");
  Report report("commutator_polynomial");
  const auto c = commutator(gen.Vminus[0], gen.Vplus[0]);
  const Eigen::VectorXd diag = block_diagonal(c, block, "commutator_polynomial_check");
  const Eigen::VectorXd weights = block_diagonal(gen.V0, block, "commutator_polynomial_check");
  const auto P = q.difference();
  const double scale = std::max(1.0, diag.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    worst = std::max(worst, std::abs(diag(i) - P(weights(i))) / scale);
  }
  report.add("commutator_equals_difference_polynomial", worst, kPolyTol);
  report.add("degree_is_s_plus_1", std::abs(q.degree - (q.s + 1)), 0.0);
  return report;
}

// ---------------------------------------------------------------------------

HpTriple holstein_primakoff(const PlaGenerators& gen, const BlockSubspace& block) {
  require_chain_block(gen, block, "holstein_primakoff");
  const int d = block.dimension;
  HpTriple hp;
  hp.label = block.label;
  hp.j = 0.5 * (d - 1);

  const auto vplus = restrict_to_block(gen.Vplus[0], block);
  if (!vplus.invariant) throw ModelViolationError("holstein_primakoff: V+ leaks out of the block");
  const Eigen::VectorXd weights = block_diagonal(gen.V0, block, "holstein_primakoff");
  const Eigen::VectorXd vmvp = block_diagonal(gen.Vminus[0] * gen.Vplus[0], block, "holstein_primakoff");

  hp.R0_plus_J = 0.5 * (weights.minCoeff() + weights.maxCoeff());
  hp.Y0 = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) hp.Y0(k, k) = weights(k) - hp.R0_plus_J;

  // phi(v) = <V-V+>_v / ((j - m)(j + m + 1)) on every weight where V+ is nonzero.
  Eigen::VectorXd inv_sqrt_phi = Eigen::VectorXd::Zero(d);
  for (int k = 0; k + 1 < d; ++k) {
    const double m = weights(k) - hp.R0_plus_J;
    const double target = (hp.j - m) * (hp.j + m + 1.0);
    const double phi = vmvp(k) / target;
    if (!(phi > 0.0)) {
      throw RepresentationDefectError("holstein_primakoff: phi(" + std::to_string(weights(k)) +
                                      ") = " + std::to_string(phi) + " <= 0 on block " +
                                      block.label.to_string());
    }
    hp.phi_values.emplace_back(weights(k), phi);
    inv_sqrt_phi(k) = 1.0 / std::sqrt(phi);
  }
  hp.Yplus = vplus.matrix * inv_sqrt_phi.cast<Complex>().asDiagonal();
  hp.Yminus = hp.Yplus.adjoint();
  return hp;
}

Report verify_hp(const HpTriple& hp) {
  Report report("holstein_primakoff");
  const auto& Y0 = hp.Y0;
  const auto& Yp = hp.Yplus;
  const auto& Ym = hp.Yminus;
  auto maxabs = [](const Eigen::MatrixXcd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; };
  const double scale = std::max(1.0, std::max(maxabs(Yp), maxabs(Y0)));

  report.add("Y0_Yplus", maxabs(Y0 * Yp - Yp * Y0 - Yp) / scale, kIdentityTol);
  report.add("Y0_Yminus", maxabs(Y0 * Ym - Ym * Y0 + Ym) / scale, kIdentityTol);
  report.add("Yplus_Yminus", maxabs(Yp * Ym - Ym * Yp - 2.0 * Y0) / scale, kIdentityTol);
  report.add("Yminus_adjoint", maxabs(Ym - Yp.adjoint()) / scale, kIdentityTol);

  const Eigen::MatrixXcd cas = Yp * Ym + Y0 * Y0 - Y0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cas, Eigen::EigenvaluesOnly);
  const double jj = hp.j * (hp.j + 1.0);
  const double spread = (es.eigenvalues().array() - jj).abs().maxCoeff();
  report.add("casimir_single_eigenvalue", spread / std::max(1.0, jj), kPolyTol);

  std::vector<double> spec(Y0.rows());
  for (Eigen::Index k = 0; k < Y0.rows(); ++k) spec[k] = Y0(k, k).real();
  std::sort(spec.begin(), spec.end());
  double dev = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) dev = std::max(dev, std::abs(spec[k] - (-hp.j + static_cast<double>(k))));
  report.add("Y0_spectrum", dev, kIdentityTol);

  bool positive = true;
  for (const auto& [v, phi] : hp.phi_values) positive = positive && phi > 0.0;
  report.add_condition("phi_positive", positive);
  return report;
}

// ---------------------------------------------------------------------------

std::vector<double> differential_gamma(const StructurePolynomial& q) {
  // Q(theta + R0) = sum_l b_l theta^l with theta = z d/dz, and
  // theta^l = sum_k S(l,k) z^k (d/dz)^k.
  const auto b = q.q.shifted(q.lowest_weight).coeffs();
  const int top = static_cast<int>(b.size()) - 1;
  const auto S = stirling_second_kind(top);
  std::vector<double> gamma(top + 1, 0.0);
  for (int l = 0; l <= top; ++l)
    for (int k = 0; k <= l; ++k) gamma[k] += b[l] * S[l][k];
  return gamma;
}

Report differential_realization_check(const StructurePolynomial& q, double casimir_value,
                                      int max_degree) {
  if (max_degree < q.s + 2) throw ValidationError("differential_realization_check: max_degree must be >= s+2");
  Report report("differential_realization");
  const double R0 = q.lowest_weight;
  const int D = max_degree + 2;  // monomials z^0 .. z^{max_degree+1}

  Eigen::MatrixXd Vp = Eigen::MatrixXd::Zero(D, D);
  Eigen::MatrixXd V0 = Eigen::MatrixXd::Zero(D, D);
  Eigen::MatrixXd Vm = Eigen::MatrixXd::Zero(D, D);
  for (int m = 0; m < D; ++m) {
    if (m + 1 < D) Vp(m + 1, m) = 1.0;
    V0(m, m) = m + R0;
    if (m >= 1) Vm(m - 1, m) = casimir_value + q(m + R0);
  }

  double qscale = 1.0;
  for (int m = 0; m <= max_degree + 1; ++m) qscale = std::max(qscale, std::abs(q(m + R0)));

  const Eigen::MatrixXd cp = V0 * Vp - Vp * V0 - Vp;
  const Eigen::MatrixXd cm = V0 * Vm - Vm * V0 + Vm;
  const Eigen::MatrixXd cpm = Vm * Vp - Vp * Vm;
  double rp = 0.0, rm = 0.0, rpm = 0.0;
  for (int m = 0; m <= max_degree; ++m) {
    rp = std::max(rp, cp.col(m).cwiseAbs().maxCoeff() / std::max(1.0, D + std::abs(R0)));
    rm = std::max(rm, cm.col(m).cwiseAbs().maxCoeff() / qscale);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(D);
    expected(m) = q(m + 1 + R0) - q(m + R0);
    rpm = std::max(rpm, (cpm.col(m) - expected).cwiseAbs().maxCoeff() / qscale);
  }
  report.add("V0_Vplus_monomial", rp, kIdentityTol);
  report.add("V0_Vminus_monomial", rm, kIdentityTol);
  report.add("Vminus_Vplus_difference_monomial", rpm, kIdentityTol);
  report.add("lowest_weight_annihilation", std::abs(casimir_value + q(R0)) / qscale, kIdentityTol);

  const auto gamma = differential_gamma(q);
  double gres = 0.0;
  for (int m = 0; m <= max_degree; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < gamma.size(); ++k) acc += gamma[k] * falling_factorial(m, static_cast<int>(k));
    gres = std::max(gres, std::abs(acc - q(m + R0)) / qscale);
  }
  report.add("gamma_expansion", gres, kIdentityTol);
  report.add("gamma0_vanishes", std::abs(gamma.front()) / qscale, kIdentityTol);
  return report;
}

Report realization_intertwining_check(const PlaGenerators& gen, const BlockSubspace& block,
                                      const StructurePolynomial& q) {
  require_chain_block(gen, block, "realization_intertwining_check");
  Report report("realization_intertwining");
  const int d = block.dimension;
  const double R0 = q.lowest_weight;
  const Eigen::MatrixXcd bp = restrict_to_block(gen.Vplus[0], block).matrix;
  const Eigen::MatrixXcd bm = restrict_to_block(gen.Vminus[0], block).matrix;
  const Eigen::MatrixXcd b0 = restrict_to_block(gen.V0, block).matrix;

  // Monomial action on z^0..z^{d-1}; z^d and above form an invariant subspace
  // (V- z^d carries Q(R0 + d) = 0), so the block is the quotient.
  Eigen::MatrixXcd zp = Eigen::MatrixXcd::Zero(d, d), z0 = zp, zm = zp;
  for (int m = 0; m < d; ++m) {
    if (m + 1 < d) zp(m + 1, m) = 1.0;
    z0(m, m) = m + R0;
    if (m >= 1) zm(m - 1, m) = q.casimir_value + q(m + R0);
  }
  // |kappa> -> z^kappa / c_kappa with c_kappa = prod_{i<=kappa} sqrt(Q(R0 + i)).
  Eigen::VectorXcd c(d);
  c(0) = 1.0;
  for (int m = 1; m < d; ++m) c(m) = c(m - 1) * std::sqrt(q(m + R0));
  const Eigen::MatrixXcd T = c.cwiseInverse().asDiagonal();
  const Eigen::MatrixXcd Tinv = c.asDiagonal();

  auto rel = [](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
  };
  report.add("conjugate_Vplus", rel(Tinv * zp * T, bp), kPolyTol);
  report.add("conjugate_Vminus", rel(Tinv * zm * T, bm), kPolyTol);
  report.add("conjugate_V0", rel(Tinv * z0 * T, b0), kPolyTol);
  return report;
}

// ---------------------------------------------------------------------------

Report u2_tensor_lift(const PlaGenerators& gen, int margin) {
  if (gen.spec.n != 2 || gen.spec.s != 2) throw ValidationError("u2_tensor_lift: requires n = 2, s = 2");
  Report report("u2_tensor_lift");
  const auto P = interior_projector(gen.basis, margin);
  const auto& E12 = gen.E[0][1];
  const auto& E21 = gen.E[1][0];
  const int i11[] = {1, 1};
  const auto& V11 = gen.vplus(i11);
  const auto& W11 = gen.vminus(i11);

  const LadderFactor f12[] = {{1, Ladder::create}, {2, Ladder::create}, {0, Ladder::annihilate}};
  const LadderFactor f22[] = {{2, Ladder::create}, {2, Ladder::create}, {0, Ladder::annihilate}};
  const LadderFactor g12[] = {{1, Ladder::annihilate}, {2, Ladder::annihilate}, {0, Ladder::create}};
  const LadderFactor g22[] = {{2, Ladder::annihilate}, {2, Ladder::annihilate}, {0, Ladder::create}};
  const auto V12 = monomial_op(gen.basis, f12);
  const auto V22 = monomial_op(gen.basis, f22);
  const auto W12 = monomial_op(gen.basis, g12);
  const auto W22 = monomial_op(gen.basis, g22);
  const auto zero = OperatorMatrix::zero(gen.basis);

  const auto ad21 = commutator(E21, V11);
  const auto ad21_2 = commutator(E21, ad21);
  const auto ad21_3 = commutator(E21, ad21_2);
  const auto bd12 = commutator(E12, W11);
  const auto bd12_2 = commutator(E12, bd12);
  const auto bd12_3 = commutator(E12, bd12_2);

  constexpr double tol = 1e-12;
  auto res = [&](const OperatorMatrix& a, const OperatorMatrix& b) {
    return interior_residual(a, b, P) / std::max(1.0, interior_norm(V11, P));
  };
  report.add("ad_E12_V11_vanishes", res(commutator(E12, V11), zero), tol);
  report.add("ad_E21_V11_is_2V12", res(ad21, 2.0 * V12), tol);
  report.add("ad2_E21_V11_is_2V22", res(ad21_2, 2.0 * V22), tol);
  report.add("ad3_E21_V11_vanishes", res(ad21_3, zero), tol);
  report.add("ad_E21_V11bar_vanishes", res(commutator(E21, W11), zero), tol);
  report.add("ad_E12_V11bar_is_minus_2V12bar", res(bd12, -2.0 * W12), tol);
  report.add("ad2_E12_V11bar_is_2V22bar", res(bd12_2, 2.0 * W22), tol);
  report.add("ad3_E12_V11bar_vanishes", res(bd12_3, zero), tol);
  const int i12[] = {1, 2};
  const int i22[] = {2, 2};
  report.add("stored_V12_matches_monomial", res(gen.vplus(i12), V12), tol);
  report.add("stored_V22_matches_monomial", res(gen.vplus(i22), V22), tol);
  return report;
}

}  // namespace polyalg
