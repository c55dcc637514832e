#pragma once

// Double standard map f_{a,b}(x) = 2x + a + (b/pi) sin 2 pi x (mod 1): point
// evaluation, derivatives, critical-orbit traces and Lyapunov diagnostics.

#include <cstdint>
#include <optional>
#include <vector>

#include "dsm/map_math.hpp"

namespace dsm {

// The cubic critical point at b = 1, inflexion point for b < 1.
inline constexpr double kCritical = 0.5;

struct MapParams {
  double a = 0.0;
  double b = 0.0;

  MapParams() = default;
  // Throws Error(InvalidArgument) unless 0 <= a < 1 and 0 <= b <= 1.
  MapParams(double a_value, double b_value);
};

// A point of R/Z, always stored in [0, 1).
class CirclePoint {
 public:
  constexpr CirclePoint() = default;
  explicit CirclePoint(double value) : x_(math::wrap(value)) {}

  double value() const noexcept { return x_; }
  friend bool operator==(CirclePoint, CirclePoint) = default;

 private:
  double x_ = 0.0;
};

// Unreduced lift of an orbit point, kept as an integer turn count plus a
// fractional part so that long orbits do not lose the fraction to the
// growing integer part. Turns wrap modulo 2^64; only differences between
// nearby lifts are meaningful.
struct LiftPoint {
  std::uint64_t turns = 0;
  double frac = 0.0;

  static LiftPoint from(double x);
};

// hi - lo as a real number; exact in the turn count for |hi - lo| < 2^63.
double lift_difference(const LiftPoint& hi, const LiftPoint& lo);
int compare_lifts(const LiftPoint& lhs, const LiftPoint& rhs);
LiftPoint advance(const LiftPoint& p, double a, double b);

double lift(const MapParams& p, double x);
CirclePoint eval(const MapParams& p, CirclePoint x);
double deriv(const MapParams& p, double x);
double deriv2(const MapParams& p, double x);
double circle_dist(double x, double y);
inline double circle_dist(CirclePoint x, CirclePoint y) { return circle_dist(x.value(), y.value()); }

// Product of derivative factors along an orbit. Switches to a log-space sum
// once any factor drops below kLogThreshold; an exact zero factor is kept
// as a flagged zero rather than a silent 0 in the product.
class DerivativeProduct {
 public:
  static constexpr double kLogThreshold = 1e-8;

  explicit DerivativeProduct(bool force_log = false) : log_mode_(force_log) {}

  void multiply(double factor);
  double value() const;
  double log_value() const;
  bool is_zero() const noexcept { return zero_; }
  bool log_mode() const noexcept { return log_mode_; }

 private:
  double product_ = 1.0;
  double log_sum_ = 0.0;
  bool log_mode_ = false;
  bool zero_ = false;
};

struct TraceOptions {
  bool force_log = false;
  bool keep_lifts = false;
};

struct OrbitTrace {
  std::vector<double> points;        // xi_0 .. xi_n
  std::vector<double> space_derivs;  // [k] = prod_{j=1}^{k} f'(xi_j)
  std::vector<double> log_space_derivs;
  std::vector<double> param_derivs;  // [k] = d/da f^k(c)
  std::vector<LiftPoint> lifts;      // only with TraceOptions::keep_lifts
  // First index j >= 1 at which xi_j sits on c to machine precision at b = 1.
  std::optional<std::size_t> critical_hit;
  bool log_mode = false;
};

// Orbit of an arbitrary starting point x0 (points[0] = x0); same layout.
OrbitTrace iterate_from(const MapParams& p, double x0, int n, TraceOptions opts = {});
OrbitTrace iterate_critical(const MapParams& p, int n, TraceOptions opts = {});

// d_a xi_n / (f^{n-1})'(f(c)). Throws DegenerateDerivative if a partial
// product vanishes.
double comparability_ratio(const MapParams& p, int n);
// The same quantity summed directly: sum_{k<n} 1/(f^k)'(f(c)).
double comparability_sum(const OrbitTrace& trace, int n);

// Mean of log f'(xi_j) over burn_in < j <= n.
double lyapunov_critical(const MapParams& p, long n, long burn_in);

// Raw-parameter variants used by the scan and induction engines, which
// evaluate parameters outside the validated MapParams range.
double xi(double a, double b, int n);
LiftPoint xi_lift(double a, double b, int n);
// (f^k)'(f(c)) for k = n - 1, i.e. prod_{j=1}^{n-1} f'(xi_j).
double critical_derivative(double a, double b, int n);

// Arbitrary-precision orbit helpers; precision is whatever HighReal's
// current default is (see PrecisionScope).
HighReal iterate_high(const HighReal& a, const HighReal& b, HighReal x, int n);
HighReal orbit_derivative_high(const HighReal& a, const HighReal& b, HighReal x, int n);

}  // namespace dsm
