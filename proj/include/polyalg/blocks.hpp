#ifndef POLYALG_BLOCKS_HPP
#define POLYALG_BLOCKS_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyalg/fock.hpp"
#include "polyalg/report.hpp"

namespace polyalg {

struct PlaGenerators;
struct PolarizationOps;

enum class BlockKind { mps, polarization };

/// Labels an invariant subspace.
///
/// mps blocks carry (k, 2j): k = n_1 mod s is the C_s charge and the reference
/// vector is (a_1^+)^k (a_0^+)^{2j}|0>. Polarization blocks carry the
/// quasispin p (stored doubled) and the photon-number shell.
struct BlockLabel {
  BlockKind kind = BlockKind::mps;
  int k = 0;
  int two_j = 0;
  int two_p = 0;
  int shell = 0;

  static BlockLabel mps(int k, int two_j) { return {BlockKind::mps, k, two_j, 0, 0}; }
  static BlockLabel polarization(int two_p, int shell) {
    return {BlockKind::polarization, 0, 0, two_p, shell};
  }

  double j() const { return 0.5 * two_j; }
  double p() const { return 0.5 * two_p; }
  std::string to_string() const;
  bool operator==(const BlockLabel&) const = default;
};

struct BlockSubspace {
  BlockLabel label;
  BasisPtr basis;
  /// Orthonormal columns in Fock-basis coordinates (basis.size() x dimension).
  SparseMatrix columns;
  int dimension = 0;
  /// Column holding the reference vector |[c_i]>.
  int reference_index = 0;
  /// Polarization only: number of irreducible su(2) copies d(p). Columns are
  /// ordered copy-major, each copy running m = -p, ..., +p.
  int multiplicity = 1;
  /// r_1 eigenvalue (mps) or p(p+1) (polarization).
  double eigenvalue = 0.0;

  /// Column `c` as a dense Fock-space vector.
  Eigen::VectorXcd column(int c) const;
  /// Occupation vector of the basis state carrying the most weight in column `c`.
  Occupation dominant_occupation(int c) const;
  /// Embeds block coordinates into the Fock space.
  Eigen::VectorXcd embed(const Eigen::VectorXcd& block_vector) const;
  /// Projects a Fock-space vector onto block coordinates.
  Eigen::VectorXcd project(const Eigen::VectorXcd& fock_vector) const;
};

struct MpsDecomposition {
  std::vector<BlockSubspace> blocks;
  /// Blocks whose reference vector fits the cutoff but whose V+ chain does not.
  std::vector<BlockLabel> clipped;
};

/// Chain blocks of the n = 1 multiphoton model. Each block is spanned by
/// V+^kappa |[c_i]>, kappa = 0..2j, normalized; blocks clipped by the cutoff
/// are dropped (listed in `clipped` and logged to stderr when `log_clipped`).
MpsDecomposition decompose_mps(const PlaGenerators& gen, bool log_clipped = false);

/// The single chain block (k, 2j); throws IndexError when it does not fit.
BlockSubspace mps_block(const PlaGenerators& gen, int k, int two_j);

/// Coverage bookkeeping for an mps decomposition: no state in two blocks,
/// every state whose chain fits the cutoff is covered, dimensions are 2j + 1.
Report mps_partition_report(const PlaGenerators& gen, const MpsDecomposition& dec);

/// L(p) subspaces of one photon-number shell, ascending p.
std::vector<BlockSubspace> decompose_polarization(const PolarizationOps& pol, int shell);

/// Direct sum over shells 0..max_shell of the L(p) blocks with the given p.
/// Invariant under every polarization Hamiltonian (cluster terms move N by 2
/// but conserve p).
BlockSubspace polarization_sector(const PolarizationOps& pol, int two_p, int max_shell);

struct RestrictedOperator {
  Eigen::MatrixXcd matrix;
  /// Frobenius norm of (1 - Pi) op Pi.
  double leakage = 0.0;
  bool invariant = true;
};

/// Pi^dagger op Pi in block coordinates. Flags the result non-invariant when
/// the leakage exceeds 1e-10 max(1, |op Pi|).
RestrictedOperator restrict_to_block(const OperatorMatrix& op, const BlockSubspace& block);

/// Orthonormality of the block columns (max |C^dagger C - 1|).
double orthonormality_defect(const BlockSubspace& block);

nlohmann::ordered_json block_inventory_json(const std::vector<BlockSubspace>& blocks);

}  // namespace polyalg

#endif  // POLYALG_BLOCKS_HPP
