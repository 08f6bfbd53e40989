#ifndef POLYALG_DYNAMICS_HPP
#define POLYALG_DYNAMICS_HPP

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polyalg/blocks.hpp"
#include "polyalg/fock.hpp"
#include "polyalg/pla.hpp"
#include "polyalg/report.hpp"

namespace polyalg {

/// Parameters of the multiphoton scattering Hamiltonian
/// H = omega0 a0^+ a0 + sum omega_ij E_ij + sum g_{i1..is} a^+_{i1}..a^+_{is} a0 + h.c. + delta(R1).
struct MpsHamiltonianParams {
  double omega0 = 0.0;
  /// n x n hermitian matrix over the scattered modes (diagonal included).
  Eigen::MatrixXcd omega;
  /// Fully symmetric rank-s tensor, flattened row-major over 0-based indices:
  /// g_{i1..is} sits at ((i1 n + i2) n + ...) + is.
  std::vector<Complex> g_tensor;
  /// delta(R1) = sum_k delta[k] R1^k; R1 is central, so these terms only shift block energies.
  std::vector<double> delta;

  /// Entry at 0-based indices.
  Complex g_at(std::span<const int> indices, int n) const;
};

/// Tensor with a single nonzero element g at the all-ones index, i.e. H = g V+_{1..1} + h.c.
std::vector<Complex> single_coupling_tensor(int n, int s, Complex g);

/// Checks shapes, finiteness, hermiticity of omega and permutation symmetry of g.
/// Throws ValidationError naming the offending field.
void validate_mps_params(const PlaModelSpec& spec, const MpsHamiltonianParams& params);

OperatorMatrix build_mps_hamiltonian(const PlaGenerators& gen, const MpsHamiltonianParams& params);

/// Unitary mode rotation among modes 1..n together with the reduced parameters.
struct RankOneReduction {
  /// Column 0 is the coupling direction c/|c| (largest component real positive).
  Eigen::MatrixXcd rotation;
  /// Single coupling g~ at the all-ones index; omega' = W^dagger omega W.
  MpsHamiltonianParams reduced;
  Complex coupling{0.0, 0.0};
  /// max |g - g~ u x .. x u| over tensor entries.
  double factorization_residual = 0.0;
};

/// Factorizes g = g~ u x ... x u. Throws UnsupportedReductionError when the
/// best rank-one symmetric approximation misses by more than 1e-10 max(1, max|g|).
RankOneReduction reduce_rank_one(const PlaModelSpec& spec, const MpsHamiltonianParams& params);

/// Fock-space operator S with S a_k^+ S^dagger = sum_i W_ik a_i^+ on modes 1..n;
/// mode 0 is left alone. Built column by column from S|m> = prod_k (b_k^+)^{m_k}/sqrt(m_k!)|0>.
OperatorMatrix mode_rotation_operator(const BasisPtr& basis, const Eigen::MatrixXcd& rotation);

/// H = S H' S^dagger on the whole truncated space and equality of spectra (1e-9 relative).
Report rank_one_conjugation_check(const PlaGenerators& gen, const MpsHamiltonianParams& original,
                                  const RankOneReduction& reduction);

struct NamedMatrix {
  std::string name;
  Eigen::MatrixXcd matrix;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> states;
  /// The block Hamiltonian that generated the evolution.
  Eigen::MatrixXcd hamiltonian;
  double norm_drift = 0.0;
  /// max |<H>(t) - <H>(0)| / max(1, |<H>(0)|).
  double energy_drift = 0.0;
  /// Per conserved quantity, max |<C>(t) - <C>(0)| / max(1, |<C>(0)|).
  std::vector<std::pair<std::string, double>> constants_drift;
};

/// psi(t) = exp(-i H t) psi0 by eigendecomposition. Refuses a flagged
/// non-invariant restriction (NonInvariantError), a non-hermitian block or an
/// unnormalized psi0 (ValidationError).
EvolutionResult evolve_block_exact(const RestrictedOperator& hamiltonian, const Eigen::VectorXcd& psi0,
                                   std::span<const double> times,
                                   std::span<const NamedMatrix> conserved = {});

/// <psi(t)|A|psi(t)> along the series for a block operator.
std::vector<Complex> expectation_series(const EvolutionResult& result, const Eigen::MatrixXcd& op);

struct HeisenbergSeries {
  std::vector<std::string> names;
  /// values[k][t] = <psi(t)| I_k |psi(t)>.
  std::vector<std::vector<Complex>> values;
  /// Per observable, max |d<I>/dt - <i[H, I]>| over interior grid points,
  /// relative to max(1, |[H, I]|). Empty when the check was skipped.
  std::vector<double> ehrenfest_residual;
  bool ehrenfest_checked = false;
  Report report;
};

/// Expectation series plus the Ehrenfest check with a five-point centered
/// derivative on a uniform grid (tolerance 1e-6). Skipped with a warning when
/// dt |H| > 0.1 or the grid is not uniform.
HeisenbergSeries heisenberg_expectations(const EvolutionResult& result,
                                         std::span<const NamedMatrix> ops);

/// Classical phase-space point (<V0>, Re<V+>, Im<V+>).
struct BlochState {
  double v0 = 0.0;
  double v_re = 0.0;
  double v_im = 0.0;
  double r1 = 0.0;
  double energy = 0.0;

  Complex vplus() const { return {v_re, v_im}; }
};

/// H = a V0 + g V+ + g* V- + f(R1) on one R1 sector.
struct BlochParams {
  double a = 0.0;
  Complex g{0.0, 0.0};
};

/// a = s omega_11 - omega_0 and g = g_{1..1} for n = 1 parameters.
BlochParams bloch_params_from(const PlaModelSpec& spec, const MpsHamiltonianParams& params);

struct BlochOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
};

struct BlochTrajectory {
  std::vector<double> times;
  std::vector<BlochState> states;
  /// E = a v0 + 2 Re(g v+), drift relative to max(1, |E(0)|).
  double energy_drift = 0.0;
  /// |v+|^2 - K(v0) with K' = P, drift relative to max(1, |v+(0)|^2 + |K(v0(0))|).
  double invariant_drift = 0.0;
  Report report;
};

/// E = a v0 + 2 Re(g v+).
double bloch_energy(const BlochParams& params, const BlochState& state);
/// |v+|^2 - K(v0) with K the antiderivative of P(v0) = Q(v0+1) - Q(v0).
double bloch_invariant(const StructurePolynomial& q, const BlochState& state);

/// Integrates dv0/dt = 2 Im(g v+), dv+/dt = i a v+ + i g* P(v0) with adaptive
/// Dormand-Prince 5(4), reporting the state at each requested time. Throws
/// IntegrationError with the reached time when the stepper stalls or the
/// state stops being finite.
BlochTrajectory mean_field_bloch(const StructurePolynomial& q, const BlochParams& params,
                                 const BlochState& init, std::span<const double> times,
                                 const BlochOptions& options = {});

struct SecondOrderResult {
  double max_residual = 0.0;
  double max_rhs = 0.0;
  Report report;
};

/// Centered second difference of v0 against a(E) - a^2 v0 + 2|g|^2 P(v0).
/// Passes at 1e-4 max|rhs|; when the right-hand side vanishes (fixed point)
/// the absolute residual must stay below 1e-8.
SecondOrderResult second_order_residual(const BlochTrajectory& trajectory,
                                        const StructurePolynomial& q, const BlochParams& params);

/// Fixed point of the classical system at v0 = v0_star (a != 0):
/// v+ = -g* P(v0*) / a.
BlochState bloch_fixed_point(const StructurePolynomial& q, const BlochParams& params, double v0_star);

struct DeviationRow {
  int two_j = 0;
  int block_dimension = 0;
  double scaled_coupling = 0.0;
  double t_max = 0.0;
  /// max_t |<V0>_quantum - v0_classical| / (2j).
  double deviation = 0.0;
  /// Time series kept for output: t, quantum <V0>, classical v0.
  std::vector<double> times, quantum_v0, classical_v0;
};

struct ComparisonOptions {
  /// Horizon in units of 1 / (|g| (2j)^{(s-1)/2}).
  double horizon = 1.0;
  int time_points = 401;
  int threads = 1;
};

/// Quantum block evolution from the reference vector of (k = 0, 2j) against
/// the classical trajectory started at the same <V0>, <V+>. Blocks must fit
/// the cutoff of `gen` (n = 1 only).
std::vector<DeviationRow> compare_quantum_classical(const PlaGenerators& gen,
                                                    const MpsHamiltonianParams& params,
                                                    std::span<const int> two_j_values,
                                                    const ComparisonOptions& options = {});

nlohmann::ordered_json deviation_json(const std::vector<DeviationRow>& rows);

/// Uniform grid of `points` times on [0, t_max].
std::vector<double> uniform_grid(double t_max, int points);

}  // namespace polyalg

#endif  // POLYALG_DYNAMICS_HPP
