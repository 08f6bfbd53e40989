#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "polyalg/errors.hpp"
#include "polyalg/fock.hpp"

using namespace polyalg;

TEST_CASE("graded lexicographic order for two modes") {
  FockBasis b(2, 2);
  const std::vector<Occupation> expect = {{0, 0}, {0, 1}, {1, 0}, {0, 2}, {1, 1}, {2, 0}};
  REQUIRE(b.size() == expect.size());
  for (std::size_t i = 0; i < expect.size(); ++i) CHECK(b.state(i) == expect[i]);
}

TEST_CASE("dimension and ranking agree with enumeration") {
  for (int modes = 1; modes <= 4; ++modes) {
    for (int cutoff = 0; cutoff <= 7; ++cutoff) {
      FockBasis b(modes, cutoff);
      // C(cutoff + modes, modes) by the multiplicative formula.
      double c = 1.0;
      for (int i = 1; i <= modes; ++i) c = c * (cutoff + i) / i;
      CHECK(b.size() == static_cast<std::size_t>(std::llround(c)));
      CHECK(fock_dimension(modes, cutoff) == b.size());
      for (std::size_t i = 0; i < b.size(); ++i) {
        const auto idx = b.index_of(b.state(i));
        REQUIRE(idx);
        CHECK(*idx == i);
      }
    }
  }
  FockBasis b(3, 4);
  const int outside[] = {2, 2, 1};
  CHECK_FALSE(b.index_of(outside).has_value());
  const int negative[] = {-1, 0, 0};
  CHECK_FALSE(b.index_of(negative).has_value());
}

TEST_CASE("shells are contiguous and complete") {
  FockBasis b(3, 5);
  std::size_t total = 0;
  for (int shell = 0; shell <= 5; ++shell) {
    const auto idx = b.shell_indices(shell);
    for (std::size_t k = 1; k < idx.size(); ++k) CHECK(idx[k] == idx[k - 1] + 1);
    for (auto i : idx) CHECK(b.total(i) == shell);
    total += idx.size();
  }
  CHECK(total == b.size());
}

TEST_CASE("state bound raises SizeError") {
  CHECK_THROWS_AS(FockBasis(6, 30, 1000), SizeError);
}

TEST_CASE("ladder operators match explicit occupation arithmetic") {
  auto basis = build_basis(3, 4);
  for (int mode = 0; mode < 3; ++mode) {
    const auto dense = ladder_op(basis, mode, Ladder::create).to_dense();
    const auto down = ladder_op(basis, mode, Ladder::annihilate).to_dense();
    for (std::size_t r = 0; r < basis->size(); ++r) {
      for (std::size_t c = 0; c < basis->size(); ++c) {
        const double e = oracle::create_element(basis->state(r), basis->state(c), mode);
        CHECK(std::abs(dense(r, c) - e) < 1e-15);
        CHECK(std::abs(down(c, r) - e) < 1e-15);
      }
    }
  }
}

TEST_CASE("creation out of the cutoff shell is truncated") {
  auto basis = build_basis(2, 3);
  const auto ap = ladder_op(basis, 0, Ladder::create);
  for (std::size_t c = 0; c < basis->size(); ++c) {
    if (basis->total(c) == 3) CHECK(Eigen::VectorXcd(ap.matrix().col(c)).norm() == 0.0);
  }
}

TEST_CASE("monomial_op equals the product of ladder matrices") {
  auto basis = build_basis(3, 6);
  const LadderFactor f[] = {{1, Ladder::create}, {2, Ladder::create}, {0, Ladder::annihilate}, {1, Ladder::annihilate}};
  const auto mono = monomial_op(basis, f);
  auto prod = OperatorMatrix::identity(basis);
  for (const auto& x : f) prod = prod * ladder_op(basis, x.mode, x.kind);
  CHECK((mono - prod).max_abs() < 1e-13);
  CHECK_THROWS_AS(monomial_op(basis, std::span<const LadderFactor>{}), ValidationError);
  const LadderFactor bad[] = {{7, Ladder::create}};
  CHECK_THROWS_AS(monomial_op(basis, bad), IndexError);
}

TEST_CASE("canonical commutator holds on the interior") {
  auto basis = build_basis(2, 6);
  const auto a = ladder_op(basis, 1, Ladder::annihilate);
  const auto ad = ladder_op(basis, 1, Ladder::create);
  const auto P = interior_projector(basis, 1);
  CHECK(interior_residual(commutator(a, ad), OperatorMatrix::identity(basis), P) < 1e-14);
  // On the cutoff shell the truncation shows up.
  CHECK(commutator(a, ad).max_abs() > 1.0);
  CHECK(interior_norm(number_op(basis, 1) - ad * a, P) < 1e-14);
}

TEST_CASE("hermiticity certification") {
  auto basis = build_basis(2, 3);
  const auto ad = ladder_op(basis, 0, Ladder::create);
  CHECK_THROWS_AS(ad.certified_hermitian(), ValidationError);
  const auto x = ad + ad.adjoint();
  CHECK(x.certified_hermitian().hermitian_flag().value_or(false));
  CHECK(x.hermiticity_defect() == 0.0);
}

TEST_CASE("csv export is sorted and full precision") {
  auto basis = build_basis(1, 2);
  const auto a = ladder_op(basis, 0, Ladder::annihilate);
  std::ostringstream os;
  a.write_csv(os);
  CHECK(os.str() == "row,col,re,im\n0,1,1,0\n1,2,1.4142135623730951,0\n");
}

TEST_CASE("operators on different spaces do not mix") {
  auto b1 = build_basis(2, 3);
  auto b2 = build_basis(2, 4);
  CHECK_THROWS_AS(commutator(number_op(b1, 0), number_op(b2, 0)), StructuralError);
}
