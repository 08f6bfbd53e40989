#ifndef POLYALG_PLA_HPP
#define POLYALG_PLA_HPP

#include <map>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polyalg/blocks.hpp"
#include "polyalg/fock.hpp"
#include "polyalg/polynomial.hpp"
#include "polyalg/report.hpp"

namespace polyalg {

/// Multiphoton scattering model: n scattered modes, clusters of s quanta.
struct PlaModelSpec {
  int n = 1;
  int s = 2;
};

/// Realized basis of the polynomial Lie algebra on the (n+1)-mode Fock space.
///
/// Mode 0 is the pump mode, modes 1..n are scattered. `E[i][j]` holds
/// E_{i+1,j+1} = a^+_{i+1} a_{j+1}. Cluster operators V+ are indexed by sorted
/// multi-indices (1-based) listed in `multi_indices`; V- is stored as the exact
/// conjugate transpose of V+.
struct PlaGenerators {
  PlaModelSpec spec;
  BasisPtr basis;
  std::vector<std::vector<OperatorMatrix>> E;
  OperatorMatrix E00;
  /// N = sum_{i>=1} E_ii.
  OperatorMatrix N;
  /// (N - E00)/(s+1).
  OperatorMatrix V0;
  /// (N + s E00)/(s+1), central.
  OperatorMatrix R1;
  std::vector<std::vector<int>> multi_indices;
  std::vector<OperatorMatrix> Vplus;
  std::vector<OperatorMatrix> Vminus;

  /// V+ for an arbitrary (unsorted) 1-based index tuple of length s.
  const OperatorMatrix& vplus(std::span<const int> indices) const;
  const OperatorMatrix& vminus(std::span<const int> indices) const;
  std::size_t multi_index_position(std::span<const int> indices) const;
};

PlaGenerators build_mps_generators(const PlaModelSpec& spec, int cutoff,
                                   std::size_t max_states = FockBasis::kDefaultMaxStates);

/// Closure checks on the interior with the given margin (>= 2s):
/// [E,E] into E, [E,V+] tensor pattern, [V-,V+] commuting with R1 and V0,
/// plus the generator invariants ([R1,X]=0, [V0,V+-]=+-V+-, V- = V+^dagger).
/// Residuals are scaled by max(1, operand max-norm); tolerance 1e-10.
Report verify_pla_cr(const PlaGenerators& gen, int margin);

/// Degree-(s+1) polynomial Q(v0; r1) at the fixed r1 of one chain block.
struct StructurePolynomial {
  int s = 0;
  int degree = 0;
  Polynomial q;
  double r1 = 0.0;
  /// Lowest V0 eigenvalue on the block (R0 in the differential realization).
  double lowest_weight = 0.0;
  int block_dimension = 0;
  /// Mean of V+V- - Q(V0) over the block weights; zero on Fock space.
  double casimir_value = 0.0;
  /// Largest |V+V- - Q(V0)| over block weights not used as interpolation nodes.
  double reproduction_residual = 0.0;

  double operator()(double v0) const { return q(v0); }
  /// P(v0) = Q(v0 + 1) - Q(v0).
  Polynomial difference() const { return q.forward_difference(); }
  nlohmann::ordered_json to_json() const;
};

/// Reads Q off the diagonal of V+V- on an n = 1 chain block: interpolates
/// through the first s+2 weights and checks the remaining ones.
StructurePolynomial extract_structure_polynomial(const PlaGenerators& gen,
                                                 const BlockSubspace& block);

/// Q(v0; r1) as a function of both arguments: coefficient of v0^k is a
/// polynomial in r1 of degree <= s+1-k, fitted across several blocks.
class StructurePolynomialFamily {
 public:
  StructurePolynomialFamily() = default;
  StructurePolynomialFamily(int s, std::vector<Polynomial> coefficient_polys)
      : s_(s), coeff_(std::move(coefficient_polys)) {}

  int s() const { return s_; }
  Polynomial at(double r1) const;
  double operator()(double v0, double r1) const { return at(r1)(v0); }
  const std::vector<Polynomial>& coefficient_polynomials() const { return coeff_; }

 private:
  int s_ = 0;
  std::vector<Polynomial> coeff_;
};

/// Fits the family from per-block extractions with distinct r1. Needs at
/// least s+2 blocks.
StructurePolynomialFamily fit_structure_family(std::span<const StructurePolynomial> samples);

/// Extracts Q on every chain block of `gen` with dimension >= s+2 and fits the family.
StructurePolynomialFamily extract_structure_family(const PlaGenerators& gen);

/// C = V+V- - Q(V0; R1) on the whole interior: residual relative to max|V+V-|
/// (tolerance 1e-9), and [C, V_a] = 0 for a in {0,+,-}.
Report casimir_check(const PlaGenerators& gen, const StructurePolynomialFamily& family, int margin);

/// Same identity restricted to the R1 = Q.r1 eigenspace (one block's worth of states).
Report casimir_check(const PlaGenerators& gen, const StructurePolynomial& q, int margin);

/// Diagonal of [V-,V+] on a chain block against P(v0) = Q(v0+1) - Q(v0).
Report commutator_polynomial_check(const PlaGenerators& gen, const BlockSubspace& block,
                                   const StructurePolynomial& q);

/// su(2) triple obtained by the generalized Holstein-Primakoff map on one block.
struct HpTriple {
  BlockLabel label;
  Eigen::MatrixXcd Y0, Yplus, Yminus;
  double j = 0.0;
  /// Midpoint of the V0 spectrum; Y0 = V0 - (R0 + J).
  double R0_plus_J = 0.0;
  /// (v0, phi(v0)) for every weight on which V+ does not vanish.
  std::vector<std::pair<double, double>> phi_values;
};

HpTriple holstein_primakoff(const PlaGenerators& gen, const BlockSubspace& block);

/// [Y0,Y+-] = +-Y+-, [Y+,Y-] = 2Y0 (1e-10), Y- = Y+^dagger, Casimir spectrum
/// {j(j+1)} (1e-9), Y0 spectrum {-j..j}, phi > 0.
Report verify_hp(const HpTriple& triple);

/// Monomial action of V+ = z, V0 = z d/dz + R0, V- = z^{-1}[C + Q(z d/dz + R0)]
/// on z^0..z^max_degree, plus the gamma_k z^k (d/dz)^k expansion of Q.
Report differential_realization_check(const StructurePolynomial& q, double casimir_value,
                                      int max_degree);

/// gamma_k with Q(z d/dz + R0) = sum_k gamma_k z^k (d/dz)^k (Stirling expansion).
std::vector<double> differential_gamma(const StructurePolynomial& q);

/// Conjugation between the block matrices of V0, V+- and the monomial action
/// truncated to the block, via |kappa> -> z^kappa / c_kappa.
Report realization_intertwining_check(const PlaGenerators& gen, const BlockSubspace& block,
                                      const StructurePolynomial& q);

/// u(2) adjoint lifting of V+_11 for n = 2, s = 2 and its highest-weight conditions.
Report u2_tensor_lift(const PlaGenerators& gen, int margin);

}  // namespace polyalg

#endif  // POLYALG_PLA_HPP
