#pragma once

// Scalar-generic kernels of the double standard map. Instantiated for double
// in the scan paths and for HighReal in the oracle and deep-orbit paths.

#include <cmath>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

namespace dsm {

using HighReal = boost::multiprecision::mpfr_float;

namespace math {

template <class Real>
inline Real pi() {
  return boost::math::constants::pi<Real>();
}

template <>
inline HighReal pi<HighReal>() {
  HighReal result;
  mpfr_const_pi(result.backend().data(), MPFR_RNDN);
  return result;
}

// F(x) = 2x + a + (b/pi) sin 2 pi x, the degree-2 lift.
template <class Real>
inline Real lift(const Real& x, const Real& a, const Real& b) {
  using std::sin;
  const Real two_pi = 2 * pi<Real>();
  return Real(2 * x + a + b / pi<Real>() * sin(two_pi * x));
}

template <class Real>
inline Real wrap(const Real& y) {
  using std::floor;
  return Real(y - floor(y));
}

template <class Real>
inline Real deriv(const Real& x, const Real& b) {
  using std::cos;
  return Real(2 + 2 * b * cos(2 * pi<Real>() * x));
}

template <class Real>
inline Real deriv2(const Real& x, const Real& b) {
  using std::sin;
  return Real(-4 * pi<Real>() * b * sin(2 * pi<Real>() * x));
}

template <class Real>
inline Real circle_dist(const Real& x, const Real& y) {
  using std::abs;
  using std::floor;
  Real d = abs(Real(x - y));
  d = d - floor(d);
  return d > Real(0.5) ? Real(1 - d) : d;
}

}  // namespace math

// Sets the working precision of HighReal for the lifetime of the scope.
class PrecisionScope {
 public:
  explicit PrecisionScope(unsigned bits)
      : previous_digits10_(HighReal::default_precision()) {
    HighReal::default_precision(bits_to_digits10(bits));
  }
  ~PrecisionScope() { HighReal::default_precision(previous_digits10_); }

  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

  static unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398119521)) + 1;
  }

 private:
  unsigned previous_digits10_;
};

}  // namespace dsm
