#ifndef POLYALG_POLYNOMIAL_HPP
#define POLYALG_POLYNOMIAL_HPP

#include <span>
#include <vector>

namespace polyalg {

/// Real univariate polynomial, coefficients stored by ascending power.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  const std::vector<double>& coeffs() const { return coeffs_; }
  /// Index of the highest coefficient whose magnitude exceeds `tol`
  /// relative to the largest coefficient; -1 for the zero polynomial.
  int degree(double tol = 1e-12) const;

  double operator()(double x) const;

  Polynomial derivative() const;
  /// Antiderivative with zero constant term.
  Polynomial antiderivative() const;
  /// p(x + shift) expanded in powers of x.
  Polynomial shifted(double shift) const;
  /// p(x + 1) - p(x).
  Polynomial forward_difference() const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double c, const Polynomial& p);

 private:
  std::vector<double> coeffs_;
};

/// Interpolating polynomial through (nodes[i], values[i]) in the monomial basis.
/// Solved with a column-pivoted QR of the Vandermonde matrix.
Polynomial interpolate(std::span<const double> nodes, std::span<const double> values);

/// Least-squares polynomial of the given degree through the samples.
Polynomial fit_least_squares(std::span<const double> nodes, std::span<const double> values,
                             int degree);

}  // namespace polyalg

#endif  // POLYALG_POLYNOMIAL_HPP
