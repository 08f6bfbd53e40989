#ifndef POLYALG_POLARIZATION_HPP
#define POLYALG_POLARIZATION_HPP

#include <array>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polyalg/fock.hpp"
#include "polyalg/report.hpp"

namespace polyalg {

/// Polarization quasispin and biphoton cluster operators on 2n modes.
///
/// Spatial mode i (1-based) carries helicity modes (i,+) and (i,-) at Fock
/// mode indices 2(i-1) and 2(i-1)+1. E, X and Xdag are indexed [i-1][j-1].
struct PolarizationOps {
  int n_spatial = 0;
  BasisPtr basis;
  OperatorMatrix P0, Pplus, Pminus;
  /// Cartesian components (P+ + P-)/2 and (P+ - P-)/2i.
  OperatorMatrix P1, P2;
  /// P0^2 + (P+P- + P-P+)/2.
  OperatorMatrix P2sq;
  std::vector<std::vector<OperatorMatrix>> E;
  std::vector<std::vector<OperatorMatrix>> X;
  std::vector<std::vector<OperatorMatrix>> Xdag;

  static int mode(int spatial, bool plus) { return 2 * (spatial - 1) + (plus ? 0 : 1); }
};

PolarizationOps build_polarization_ops(int n_spatial, int cutoff,
                                       std::size_t max_states = FockBasis::kDefaultMaxStates);

/// su(2) relations of P, invariance of X+ and E under P, X antisymmetry.
Report verify_polarization_ops(const PolarizationOps& pol, int margin);

/// Normalized prod (X+_ij)^kappa_ij |0> (1-based i < j).
Eigen::VectorXcd p_scalar_state(const PolarizationOps& pol,
                                const std::map<std::pair<int, int>, int>& powers);

struct Moment {
  int a1 = 0, a2 = 0, a0 = 0;
  Complex value;
};

struct MomentReport {
  std::vector<Moment> moments;
  double max_abs = 0.0;
  Report report;
  nlohmann::ordered_json to_json() const;
};

/// <psi| P1^a1 P2^a2 P0^a0 |psi> for 1 <= a1+a2+a0 <= max_order; passes when
/// every moment is below 1e-10.
MomentReport verify_p_scalar(const PolarizationOps& pol, const Eigen::VectorXcd& state,
                             int max_order = 4);

struct PolarizationHamiltonianParams {
  /// omega_i per spatial mode.
  std::vector<double> omega;
  /// Exchange couplings omega_ij, hermitian; diagonal is ignored.
  Eigen::MatrixXcd omega_ij;
  /// Cluster couplings g_ij stored for i < j only.
  Eigen::MatrixXcd g;
  /// Drive coefficients for (P1, P2, P0).
  std::array<double, 3> Omega{0.0, 0.0, 0.0};
};

/// H_fl + H_so*(2m) + H_SU(2); the i != j cluster sum is realized as
/// 2 sum_{i<j} (g_ij X_ij + g*_ij X+_ij) with the antisymmetric extension of g.
OperatorMatrix build_polarization_hamiltonian(const PolarizationOps& pol,
                                              const PolarizationHamiltonianParams& params);

/// exp(xi P+ - xi* P-) applied shell by shell to `reference`.
Eigen::VectorXcd su2_coherent_prep(const PolarizationOps& pol, Complex xi,
                                   const Eigen::VectorXcd& reference);

}  // namespace polyalg

#endif  // POLYALG_POLARIZATION_HPP
