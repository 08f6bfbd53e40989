#include "polyalg/fock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "polyalg/errors.hpp"

namespace polyalg {

namespace {

void enumerate_shell(int modes, int total, Occupation& current, int position, int remaining,
                     std::vector<Occupation>& out) {
  if (position == modes - 1) {
    current[position] = remaining;
    out.push_back(current);
    return;
  }
  for (int x = 0; x <= remaining; ++x) {
    current[position] = x;
    enumerate_shell(modes, total, current, position + 1, remaining - x, out);
  }
}

void check_same_basis(const OperatorMatrix& a, const OperatorMatrix& b, const char* what) {
  if (a.basis_ptr() != b.basis_ptr() && !a.basis().same_space(b.basis())) {
    throw StructuralError(std::string(what) + ": operators act on different Fock spaces");
  }
}

}  // namespace

std::size_t fock_dimension(int modes, int cutoff) {
  // C(cutoff + modes, modes) computed incrementally; each step is exact.
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  std::size_t result = 1;
  for (int k = 1; k <= modes; ++k) {
    const auto num = static_cast<std::size_t>(cutoff + k);
    if (result > kMax / num) return kMax;
    result = result * num / static_cast<std::size_t>(k);
  }
  return result;
}

FockBasis::FockBasis(int mode_count, int total_cutoff, std::size_t max_states)
    : modes_(mode_count), cutoff_(total_cutoff) {
  if (mode_count < 1) throw ValidationError("build_basis: mode_count must be >= 1");
  if (total_cutoff < 0) throw ValidationError("build_basis: total_cutoff must be >= 0");
  const std::size_t dim = fock_dimension(mode_count, total_cutoff);
  if (dim > max_states) {
    throw SizeError("build_basis: dimension " + std::to_string(dim) + " for " +
                    std::to_string(mode_count) + " modes at cutoff " +
                    std::to_string(total_cutoff) + " exceeds the bound " +
                    std::to_string(max_states));
  }

  const int top = total_cutoff + mode_count;
  binom_.assign(top + 1, std::vector<std::size_t>(top + 1, 0));
  for (int a = 0; a <= top; ++a) {
    binom_[a][0] = 1;
    for (int b = 1; b <= a; ++b) binom_[a][b] = binom_[a - 1][b - 1] + binom_[a - 1][b];
  }

  states_.reserve(dim);
  totals_.reserve(dim);
  shell_offset_.reserve(total_cutoff + 2);
  Occupation current(mode_count, 0);
  for (int t = 0; t <= total_cutoff; ++t) {
    shell_offset_.push_back(states_.size());
    enumerate_shell(mode_count, t, current, 0, t, states_);
    totals_.resize(states_.size(), t);
  }
  shell_offset_.push_back(states_.size());
}

std::size_t FockBasis::rank_within_shell(std::span<const int> occupation, int total) const {
  std::size_t rank = 0;
  int remaining = total;
  for (int p = 0; p + 1 < modes_; ++p) {
    const int rest_modes = modes_ - p - 1;
    for (int x = 0; x < occupation[p]; ++x) {
      // compositions of (remaining - x) into rest_modes parts
      rank += binom_[remaining - x + rest_modes - 1][rest_modes - 1];
    }
    remaining -= occupation[p];
  }
  return rank;
}

std::optional<std::size_t> FockBasis::index_of(std::span<const int> occupation) const {
  if (static_cast<int>(occupation.size()) != modes_) return std::nullopt;
  int total = 0;
  for (int n : occupation) {
    if (n < 0) return std::nullopt;
    total += n;
  }
  if (total > cutoff_) return std::nullopt;
  return shell_offset_[total] + rank_within_shell(occupation, total);
}

std::vector<std::size_t> FockBasis::shell_indices(int shell) const {
  std::vector<std::size_t> out;
  if (shell < 0 || shell > cutoff_) return out;
  for (std::size_t i = shell_offset_[shell]; i < shell_offset_[shell + 1]; ++i) out.push_back(i);
  return out;
}

BasisPtr build_basis(int mode_count, int total_cutoff, std::size_t max_states) {
  return std::make_shared<const FockBasis>(mode_count, total_cutoff, max_states);
}

// ---------------------------------------------------------------------------

OperatorMatrix::OperatorMatrix(BasisPtr basis, SparseMatrix entries,
                               std::optional<bool> hermitian_flag)
    : basis_(std::move(basis)), entries_(std::move(entries)), hermitian_flag_(hermitian_flag) {
  const auto n = static_cast<Eigen::Index>(basis_->size());
  if (entries_.rows() != n || entries_.cols() != n) {
    throw StructuralError("OperatorMatrix: matrix shape does not match basis dimension");
  }
  entries_.makeCompressed();
}

OperatorMatrix OperatorMatrix::zero(BasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->size());
  return OperatorMatrix(std::move(basis), SparseMatrix(n, n), true);
}

OperatorMatrix OperatorMatrix::identity(BasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->size());
  SparseMatrix id(n, n);
  id.setIdentity();
  return OperatorMatrix(std::move(basis), std::move(id), true);
}

Complex OperatorMatrix::coeff(std::size_t row, std::size_t col) const {
  return entries_.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
}

double OperatorMatrix::max_abs() const {
  double m = 0.0;
  for (Eigen::Index k = 0; k < entries_.nonZeros(); ++k) {
    m = std::max(m, std::abs(entries_.valuePtr()[k]));
  }
  return m;
}

OperatorMatrix OperatorMatrix::adjoint() const {
  SparseMatrix adj = entries_.adjoint();
  return OperatorMatrix(basis_, std::move(adj), hermitian_flag_);
}

double OperatorMatrix::hermiticity_defect() const {
  SparseMatrix diff = entries_ - SparseMatrix(entries_.adjoint());
  double m = 0.0;
  for (Eigen::Index k = 0; k < diff.nonZeros(); ++k) m = std::max(m, std::abs(diff.valuePtr()[k]));
  return m;
}

OperatorMatrix OperatorMatrix::certified_hermitian() const {
  const double defect = hermiticity_defect();
  if (defect > 1e-12 * std::max(1.0, max_abs())) {
    throw ValidationError("operator is not hermitian: max|A - A^dagger| = " +
                          std::to_string(defect));
  }
  return OperatorMatrix(basis_, entries_, true);
}

Eigen::MatrixXcd OperatorMatrix::to_dense() const { return Eigen::MatrixXcd(entries_); }

void OperatorMatrix::write_csv(std::ostream& out) const {
  // Column-major storage iterates by (col, row); re-sort by (row, col).
  struct Entry {
    Eigen::Index row, col;
    Complex value;
  };
  std::vector<Entry> entries;
  entries.reserve(entries_.nonZeros());
  for (Eigen::Index c = 0; c < entries_.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(entries_, c); it; ++it) {
      entries.push_back({it.row(), it.col(), it.value()});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  out << "row,col,re,im\n";
  char buf[64];
  for (const auto& e : entries) {
    out << e.row << ',' << e.col << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", e.value.real());
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", e.value.imag());
    out << buf << '\n';
  }
}

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& other) {
  check_same_basis(*this, other, "operator+");
  entries_ += other.entries_;
  hermitian_flag_.reset();
  return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& other) {
  check_same_basis(*this, other, "operator-");
  entries_ -= other.entries_;
  hermitian_flag_.reset();
  return *this;
}

OperatorMatrix& OperatorMatrix::operator*=(Complex scalar) {
  entries_ *= scalar;
  if (scalar.imag() != 0.0) hermitian_flag_.reset();
  return *this;
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_same_basis(a, b, "operator*");
  SparseMatrix prod = (a.entries_ * b.entries_).pruned();
  return OperatorMatrix(a.basis_, std::move(prod));
}

// ---------------------------------------------------------------------------

OperatorMatrix ladder_op(const BasisPtr& basis, int mode, Ladder kind) {
  const LadderFactor f{mode, kind};
  return monomial_op(basis, std::span<const LadderFactor>(&f, 1));
}

OperatorMatrix monomial_op(const BasisPtr& basis, std::span<const LadderFactor> factors) {
  if (factors.empty()) throw ValidationError("monomial_op: empty product");
  for (const auto& f : factors) {
    if (f.mode < 0 || f.mode >= basis->mode_count()) {
      throw IndexError("monomial_op: mode " + std::to_string(f.mode) + " out of range [0, " +
                       std::to_string(basis->mode_count()) + ")");
    }
  }
  const int cutoff = basis->total_cutoff();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(basis->size());
  Occupation occ;
  for (std::size_t col = 0; col < basis->size(); ++col) {
    occ = basis->state(col);
    int total = basis->total(col);
    double amp = 1.0;
    for (auto it = factors.rbegin(); it != factors.rend() && amp != 0.0; ++it) {
      int& n = occ[it->mode];
      if (it->kind == Ladder::annihilate) {
        if (n == 0) {
          amp = 0.0;
        } else {
          amp *= std::sqrt(static_cast<double>(n));
          --n;
          --total;
        }
      } else {
        if (total + 1 > cutoff) {
          amp = 0.0;
        } else {
          ++n;
          ++total;
          amp *= std::sqrt(static_cast<double>(n));
        }
      }
    }
    if (amp != 0.0) {
      const auto row = basis->index_of(occ);
      trips.emplace_back(static_cast<int>(*row), static_cast<int>(col), Complex(amp, 0.0));
    }
  }
  SparseMatrix m(basis->size(), basis->size());
  m.setFromTriplets(trips.begin(), trips.end());
  return OperatorMatrix(basis, std::move(m));
}

OperatorMatrix number_op(const BasisPtr& basis, int mode) {
  if (mode < 0 || mode >= basis->mode_count()) {
    throw IndexError("number_op: mode " + std::to_string(mode) + " out of range");
  }
  return diagonal_op(basis, [mode](const Occupation& o) { return Complex(o[mode], 0.0); });
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_same_basis(a, b, "commutator");
  SparseMatrix c = (a.matrix() * b.matrix() - b.matrix() * a.matrix()).pruned();
  return OperatorMatrix(a.basis_ptr(), std::move(c));
}

OperatorMatrix interior_projector(const BasisPtr& basis, int margin) {
  if (margin < 0 || margin > basis->total_cutoff()) {
    throw ValidationError("interior_projector: margin must lie in [0, cutoff]");
  }
  const int limit = basis->total_cutoff() - margin;
  std::vector<Eigen::Triplet<Complex>> trips;
  for (std::size_t i = 0; i < basis->size(); ++i) {
    if (basis->total(i) <= limit) trips.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  }
  SparseMatrix m(basis->size(), basis->size());
  m.setFromTriplets(trips.begin(), trips.end());
  return OperatorMatrix(basis, std::move(m), true);
}

double interior_norm(const OperatorMatrix& a, const OperatorMatrix& projector) {
  return (a * projector).max_abs();
}

double interior_residual(const OperatorMatrix& a, const OperatorMatrix& b,
                         const OperatorMatrix& projector) {
  return interior_norm(a - b, projector);
}

}  // namespace polyalg
