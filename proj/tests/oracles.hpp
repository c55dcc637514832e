#pragma once

// Independent reference computations for the unit and acceptance tests.
// Everything here is evaluated directly in MPFR from the defining formulas,
// sharing no code with the library beyond the HighReal type.

#include <boost/multiprecision/mpfr.hpp>

#include <vector>

namespace oracle {

using Big = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<200>>;

inline Big big_pi() { return boost::multiprecision::acos(Big(-1)); }

inline Big f_lift(const Big& x, const Big& a, const Big& b) {
  return 2 * x + a + b / big_pi() * boost::multiprecision::sin(2 * big_pi() * x);
}

inline Big f_mod(const Big& x, const Big& a, const Big& b) {
  Big y = f_lift(x, a, b);
  return y - boost::multiprecision::floor(y);
}

inline Big f_prime(const Big& x, const Big& b) { return 2 + 2 * b * boost::multiprecision::cos(2 * big_pi() * x); }

// xi_0 .. xi_n
inline std::vector<Big> critical_orbit(double a, double b, int n) {
  std::vector<Big> xs{Big(0.5)};
  for (int j = 0; j < n; ++j) xs.push_back(f_mod(xs.back(), Big(a), Big(b)));
  return xs;
}

// Closed form: d/da xi_n = sum_{k=0}^{n-1} (f^k)'(xi_{n-k}).
inline double param_derivative_closed(double a, double b, int n) {
  const std::vector<Big> xs = critical_orbit(a, b, n);
  Big sum = 0;
  for (int k = 0; k < n; ++k) {
    Big prod = 1;
    for (int j = n - k; j < n; ++j) prod *= f_prime(xs[static_cast<std::size_t>(j)], Big(b));
    sum += prod;
  }
  return sum.convert_to<double>();
}

// Centered difference of the unreduced lift of f^n(c) in a.
inline double param_derivative_fd(double a, double b, int n, double h) {
  auto lifted = [&](const Big& aa) {
    Big x = 0.5;
    for (int j = 0; j < n; ++j) x = f_lift(x, aa, Big(b));
    return x;
  };
  return ((lifted(Big(a) + h) - lifted(Big(a) - h)) / (2 * Big(h))).convert_to<double>();
}

// (f^N)'(x) evaluated in 200 bits.
inline double orbit_derivative(double a, double b, double x, int N) {
  Big y = x;
  Big prod = 1;
  for (int j = 0; j < N; ++j) {
    prod *= f_prime(y, Big(b));
    y = f_mod(y, Big(a), Big(b));
  }
  return prod.convert_to<double>();
}

}  // namespace oracle
