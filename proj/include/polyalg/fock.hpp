#ifndef POLYALG_FOCK_HPP
#define POLYALG_FOCK_HPP

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Sparse>

namespace polyalg {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using Occupation = std::vector<int>;

/// Occupation-number basis of `mode_count` bosonic modes with total quantum
/// number at most `total_cutoff`.
///
/// States are ordered graded-lexicographically: first by total quantum number,
/// then lexicographically in (n_0, n_1, ...). For two modes and cutoff 2 this
/// gives (0,0),(0,1),(1,0),(0,2),(1,1),(2,0). Indices are computed by a
/// closed-form ranking, so `index_of` needs no lookup table.
class FockBasis {
 public:
  static constexpr std::size_t kDefaultMaxStates = 2'000'000;

  FockBasis(int mode_count, int total_cutoff, std::size_t max_states = kDefaultMaxStates);

  int mode_count() const { return modes_; }
  int total_cutoff() const { return cutoff_; }
  std::size_t size() const { return states_.size(); }

  const Occupation& state(std::size_t index) const { return states_[index]; }
  const std::vector<Occupation>& states() const { return states_; }
  int total(std::size_t index) const { return totals_[index]; }

  /// Basis index of an occupation vector, or nullopt when it is outside the space.
  std::optional<std::size_t> index_of(std::span<const int> occupation) const;

  /// Indices of all states with total quantum number exactly `shell`, in basis order.
  std::vector<std::size_t> shell_indices(int shell) const;

  /// Same mode count and cutoff.
  bool same_space(const FockBasis& other) const {
    return modes_ == other.modes_ && cutoff_ == other.cutoff_;
  }

 private:
  std::size_t rank_within_shell(std::span<const int> occupation, int total) const;

  int modes_;
  int cutoff_;
  std::vector<Occupation> states_;
  std::vector<int> totals_;
  std::vector<std::size_t> shell_offset_;
  // binom_[a][b] = C(a, b) for a <= cutoff + modes.
  std::vector<std::vector<std::size_t>> binom_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

/// Number of states of `modes` modes with total <= cutoff, i.e. C(cutoff + modes, modes).
/// Saturates at SIZE_MAX on overflow.
std::size_t fock_dimension(int modes, int cutoff);

/// Sparse complex operator bound to a Fock basis.
class OperatorMatrix {
 public:
  /// Empty placeholder bound to no basis; only valid as an assignment target.
  OperatorMatrix() = default;
  OperatorMatrix(BasisPtr basis, SparseMatrix entries,
                 std::optional<bool> hermitian_flag = std::nullopt);

  static OperatorMatrix zero(BasisPtr basis);
  static OperatorMatrix identity(BasisPtr basis);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const SparseMatrix& matrix() const { return entries_; }
  std::optional<bool> hermitian_flag() const { return hermitian_flag_; }

  std::size_t dimension() const { return basis_->size(); }
  Complex coeff(std::size_t row, std::size_t col) const;
  double max_abs() const;

  OperatorMatrix adjoint() const;
  /// max|A - A^dagger|.
  double hermiticity_defect() const;
  /// Copy carrying hermitian_flag = true; throws ValidationError if
  /// max|A - A^dagger| > 1e-12 max(1, max|A|).
  OperatorMatrix certified_hermitian() const;

  Eigen::MatrixXcd to_dense() const;

  /// CSV triples "row,col,re,im", sorted by (row, col), 17 significant digits.
  void write_csv(std::ostream& out) const;

  OperatorMatrix& operator+=(const OperatorMatrix& other);
  OperatorMatrix& operator-=(const OperatorMatrix& other);
  OperatorMatrix& operator*=(Complex scalar);

  friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
  friend OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
  friend OperatorMatrix operator*(Complex c, OperatorMatrix a) { return a *= c; }
  friend OperatorMatrix operator*(OperatorMatrix a, Complex c) { return a *= c; }
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);

 private:
  BasisPtr basis_;
  SparseMatrix entries_;
  std::optional<bool> hermitian_flag_;
};

enum class Ladder { create, annihilate };

struct LadderFactor {
  int mode;
  Ladder kind;
};

BasisPtr build_basis(int mode_count, int total_cutoff,
                     std::size_t max_states = FockBasis::kDefaultMaxStates);

/// Hard-truncated ladder operator: creation out of the cutoff shell maps to zero.
OperatorMatrix ladder_op(const BasisPtr& basis, int mode, Ladder kind);

/// Ordered product of ladder operators, rightmost factor applied first.
/// Matches the product of `ladder_op` matrices exactly, including truncation.
OperatorMatrix monomial_op(const BasisPtr& basis, std::span<const LadderFactor> factors);

OperatorMatrix number_op(const BasisPtr& basis, int mode);

/// Diagonal operator whose entry at state i is f(occupation_i).
template <typename F>
OperatorMatrix diagonal_op(const BasisPtr& basis, F&& f) {
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(basis->size());
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const Complex v = f(basis->state(i));
    if (v != Complex(0.0)) {
      trips.emplace_back(static_cast<int>(i), static_cast<int>(i), v);
    }
  }
  SparseMatrix m(basis->size(), basis->size());
  m.setFromTriplets(trips.begin(), trips.end());
  return OperatorMatrix(basis, std::move(m));
}

/// AB - BA. Throws StructuralError on basis mismatch.
OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Diagonal 0/1 projector onto states with total <= cutoff - margin.
///
/// An operator identity whose terms are products of at most `margin` ladder
/// factors holds exactly on the range of this projector: no intermediate state
/// of such a product can leave the truncated space.
OperatorMatrix interior_projector(const BasisPtr& basis, int margin);

/// max |(A - B) P|, the residual of A = B on the interior selected by P.
double interior_residual(const OperatorMatrix& a, const OperatorMatrix& b,
                         const OperatorMatrix& projector);
/// max |A P|.
double interior_norm(const OperatorMatrix& a, const OperatorMatrix& projector);

}  // namespace polyalg

#endif  // POLYALG_FOCK_HPP
