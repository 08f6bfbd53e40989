#include <vector>

#include "doctest.h"
#include "polyalg/errors.hpp"
#include "polyalg/polynomial.hpp"

using namespace polyalg;

TEST_CASE("evaluation, calculus and shifts") {
  const Polynomial p({1.0, -2.0, 0.0, 3.0});  // 1 - 2x + 3x^3
  CHECK(p(2.0) == doctest::Approx(21.0));
  CHECK(p.degree() == 3);
  CHECK(p.derivative()(2.0) == doctest::Approx(34.0));
  CHECK(p.antiderivative()(1.0) == doctest::Approx(1.0 - 1.0 + 0.75));
  CHECK(p.shifted(0.5)(1.5) == doctest::Approx(p(2.0)));
  for (double x : {-1.3, 0.0, 0.7, 4.0}) CHECK(p.forward_difference()(x) == doctest::Approx(p(x + 1) - p(x)));
  CHECK((p * p)(1.1) == doctest::Approx(p(1.1) * p(1.1)));
  CHECK((p - p).degree() == -1);
}

TEST_CASE("interpolation reproduces a quartic exactly") {
  const Polynomial truth({0.5, -1.0, 2.0, 0.25, -0.125});
  std::vector<double> x{-2, -1, 0, 1, 2}, y;
  for (double v : x) y.push_back(truth(v));
  const auto p = interpolate(x, y);
  for (std::size_t k = 0; k < truth.coeffs().size(); ++k) CHECK(p.coeffs()[k] == doctest::Approx(truth.coeffs()[k]).epsilon(1e-12));
}

TEST_CASE("least squares recovers a line from noisy-free samples") {
  std::vector<double> x{0, 1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(3.0 - 0.5 * v);
  const auto p = fit_least_squares(x, y, 1);
  CHECK(p.coeffs()[0] == doctest::Approx(3.0));
  CHECK(p.coeffs()[1] == doctest::Approx(-0.5));
}

TEST_CASE("repeated nodes are an ill-posed fit") {
  std::vector<double> x{1, 1, 1}, y{1, 2, 3};
  CHECK_THROWS_AS(interpolate(x, y), IllPosedFitError);
}
