#ifndef POLYALG_TESTS_ORACLES_HPP
#define POLYALG_TESTS_ORACLES_HPP

// Reference values computed without the library: closed forms, explicit
// occupation-number arithmetic and numerical quadrature.

#include <cmath>
#include <complex>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

namespace oracle {

/// x (x-1) ... (x-k+1).
inline double falling(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x - i;
  return r;
}

/// V+V- on the n = 1 chain state with n1 scattered and n0 pump quanta.
inline double vplus_vminus(int s, int n1, int n0) { return falling(n1, s) * (n0 + 1); }

/// Structure polynomial of the n = 1 model in closed form: with n1 = s v + r1
/// and n0 = r1 - v, V+V- = n1 (n1-1)..(n1-s+1) (n0+1).
inline double q_closed(int s, double r1, double v) { return falling(s * v + r1, s) * (r1 - v + 1.0); }

/// Weight and pump/scattered occupations of position kappa in block (k, 2j).
struct ChainState {
  int n1, n0;
  double v0, r1;
};
inline ChainState chain_state(int s, int k, int two_j, int kappa) {
  ChainState c;
  c.n1 = k + s * kappa;
  c.n0 = two_j - kappa;
  c.v0 = (c.n1 - c.n0) / (s + 1.0);
  c.r1 = (c.n1 + s * c.n0) / (s + 1.0);
  return c;
}

/// Dense matrix element <out| a_mode^+ |in> on explicit occupation vectors.
inline double create_element(const std::vector<int>& out, const std::vector<int>& in, int mode) {
  for (std::size_t m = 0; m < in.size(); ++m) {
    const int expect = in[m] + (static_cast<int>(m) == mode ? 1 : 0);
    if (out[m] != expect) return 0.0;
  }
  return std::sqrt(in[mode] + 1.0);
}

/// Coefficients of p(x) / (x - root) by synthetic division (ascending order, remainder dropped).
inline std::vector<double> deflate(const std::vector<double>& p, double root) {
  const int n = static_cast<int>(p.size()) - 1;
  std::vector<double> q(static_cast<std::size_t>(n), 0.0);
  double carry = 0.0;
  for (int i = n; i >= 1; --i) {
    carry = p[i] + carry * root;
    q[i - 1] = carry;
  }
  return q;
}

inline double horner(const std::vector<double>& p, double x) {
  double r = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * x + *it;
  return r;
}

/// Period of v0 for a = 0, real g, v+(0) = 0, given the coefficients of K
/// (antiderivative of P). v0 oscillates between va and the next root vb of
/// K(v) = K(va); the period is
///   T = 2 int_va^vb dv / (2|g| sqrt(K(v) - K(va))).
/// K(v) - K(va) = (v - va)(vb - v) R(v) is factored exactly so that the
/// tanh-sinh rule sees only the square-root endpoint singularities.
inline double bloch_period(std::vector<double> K, double g, double va, double* vb_out = nullptr) {
  const double k_a = horner(K, va);
  K[0] -= k_a;
  auto f = [&](double v) { return horner(K, v); };
  // Bracket the turning point: K - K(va) is positive just above va.
  double lo = va + 1e-6, hi = lo;
  while (f(hi) > 0.0) hi = va + 2.0 * (hi - va);
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  const double vb = 0.5 * (r.first + r.second);
  if (vb_out) *vb_out = vb;
  auto d1 = deflate(K, va);
  auto d2 = deflate(d1, vb);  // d1 = (v - vb) d2, so K - K(va) = (v - va)(vb - v)(-d2)
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto integrand = [&](double v, double vc) {
    // vc is the signed distance to the nearer endpoint, which keeps both factors accurate.
    const double left = vc < 0 ? -vc : v - va;
    const double right = vc > 0 ? vc : vb - v;
    const double rem = -horner(d2, v);
    return 1.0 / std::sqrt(left * right * rem);
  };
  return integrator.integrate(integrand, va, vb) / std::abs(g);
}

}  // namespace oracle

#endif  // POLYALG_TESTS_ORACLES_HPP
