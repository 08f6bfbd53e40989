#include "polyalg/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "polyalg/errors.hpp"

namespace polyalg {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

int Polynomial::degree(double tol) const {
  double scale = 0.0;
  for (double c : coeffs_) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return -1;
  for (int k = static_cast<int>(coeffs_.size()) - 1; k >= 0; --k) {
    if (std::abs(coeffs_[k]) > tol * scale) return k;
  }
  return -1;
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial({0.0});
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = static_cast<double>(k) * coeffs_[k];
  return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
  std::vector<double> a(coeffs_.size() + 1, 0.0);
  for (std::size_t k = 0; k < coeffs_.size(); ++k) a[k + 1] = coeffs_[k] / static_cast<double>(k + 1);
  return Polynomial(std::move(a));
}

Polynomial Polynomial::shifted(double shift) const {
  // Horner in polynomial arithmetic: p(x + c) = (...(a_n (x+c) + a_{n-1})(x+c) + ...).
  Polynomial lin({shift, 1.0});
  Polynomial acc({0.0});
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
    acc = acc * lin + Polynomial({*it});
  }
  return acc;
}

Polynomial Polynomial::forward_difference() const { return shifted(1.0) - *this; }

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
  for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
  for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
  return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + (-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.coeffs_.empty() || b.coeffs_.empty()) return Polynomial({0.0});
  std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Polynomial(std::move(c));
}

Polynomial operator*(double c, const Polynomial& p) {
  std::vector<double> out = p.coeffs_;
  for (double& x : out) x *= c;
  return Polynomial(std::move(out));
}

Polynomial fit_least_squares(std::span<const double> nodes, std::span<const double> values,
                             int degree) {
  if (nodes.size() != values.size()) throw StructuralError("fit: node/value count mismatch");
  if (degree < 0 || nodes.size() < static_cast<std::size_t>(degree + 1)) {
    throw IllPosedFitError("fit: need at least " + std::to_string(degree + 1) +
                           " samples for degree " + std::to_string(degree));
  }
  const auto m = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXd vander(m, degree + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      vander(i, k) = p;
      p *= nodes[i];
    }
    rhs(i) = values[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
  if (qr.rank() < degree + 1) throw IllPosedFitError("fit: repeated nodes, Vandermonde is singular");
  Eigen::VectorXd sol = qr.solve(rhs);
  return Polynomial(std::vector<double>(sol.data(), sol.data() + sol.size()));
}

Polynomial interpolate(std::span<const double> nodes, std::span<const double> values) {
  return fit_least_squares(nodes, values, static_cast<int>(nodes.size()) - 1);
}

}  // namespace polyalg
