#include "dsm/map.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "dsm/errors.hpp"

namespace dsm {

namespace {

constexpr double kHitDistance = 4.0 * std::numeric_limits<double>::epsilon();

bool hits_critical(double b, double x) {
  return b == 1.0 && math::circle_dist(x, kCritical) <= kHitDistance;
}

}  // namespace

MapParams::MapParams(double a_value, double b_value) : a(a_value), b(b_value) {
  if (!(a >= 0.0 && a < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "a must lie in [0,1), got " + std::to_string(a));
  }
  if (!(b >= 0.0 && b <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "b must lie in [0,1], got " + std::to_string(b));
  }
}

LiftPoint LiftPoint::from(double x) {
  const double k = std::floor(x);
  return {static_cast<std::uint64_t>(static_cast<std::int64_t>(k)), x - k};
}

double lift_difference(const LiftPoint& hi, const LiftPoint& lo) {
  const auto dt = static_cast<std::int64_t>(hi.turns - lo.turns);
  return static_cast<double>(dt) + (hi.frac - lo.frac);
}

int compare_lifts(const LiftPoint& lhs, const LiftPoint& rhs) {
  const auto dt = static_cast<std::int64_t>(lhs.turns - rhs.turns);
  if (dt != 0) return dt < 0 ? -1 : 1;
  if (lhs.frac == rhs.frac) return 0;
  return lhs.frac < rhs.frac ? -1 : 1;
}

LiftPoint advance(const LiftPoint& p, double a, double b) {
  // F(t + x) = 2t + F(x) for integer t.
  const double y = math::lift(p.frac, a, b);
  const double k = std::floor(y);
  LiftPoint out;
  out.turns = 2 * p.turns + static_cast<std::uint64_t>(static_cast<std::int64_t>(k));
  out.frac = y - k;
  if (out.frac >= 1.0) {  // y - floor(y) can round up to 1
    out.frac = 0.0;
    out.turns += 1;
  }
  return out;
}

double lift(const MapParams& p, double x) { return math::lift(x, p.a, p.b); }

CirclePoint eval(const MapParams& p, CirclePoint x) {
  return CirclePoint(math::lift(x.value(), p.a, p.b));
}

double deriv(const MapParams& p, double x) { return math::deriv(x, p.b); }
double deriv2(const MapParams& p, double x) { return math::deriv2(x, p.b); }
double circle_dist(double x, double y) { return math::circle_dist(x, y); }

void DerivativeProduct::multiply(double factor) {
  if (zero_) return;
  if (factor == 0.0) {
    zero_ = true;
    return;
  }
  if (!log_mode_ && std::abs(factor) < kLogThreshold) {
    log_mode_ = true;
    log_sum_ = std::log(std::abs(product_));
  }
  if (log_mode_) {
    log_sum_ += std::log(std::abs(factor));
  } else {
    product_ *= factor;
  }
}

double DerivativeProduct::value() const {
  if (zero_) return 0.0;
  return log_mode_ ? std::exp(log_sum_) : product_;
}

double DerivativeProduct::log_value() const {
  if (zero_) return -std::numeric_limits<double>::infinity();
  return log_mode_ ? log_sum_ : std::log(std::abs(product_));
}

OrbitTrace iterate_from(const MapParams& p, double x0, int n, TraceOptions opts) {
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 0");
  OrbitTrace t;
  const auto size = static_cast<std::size_t>(n) + 1;
  t.points.reserve(size);
  t.space_derivs.reserve(size);
  t.log_space_derivs.reserve(size);
  t.param_derivs.reserve(size);

  LiftPoint pt = LiftPoint::from(x0);
  DerivativeProduct prod(opts.force_log);
  double da = 0.0;
  t.points.push_back(pt.frac);
  t.space_derivs.push_back(1.0);
  t.log_space_derivs.push_back(0.0);
  t.param_derivs.push_back(0.0);
  if (opts.keep_lifts) t.lifts.push_back(pt);

  for (int j = 1; j <= n; ++j) {
    da = 1.0 + math::deriv(pt.frac, p.b) * da;
    pt = advance(pt, p.a, p.b);
    if (!t.critical_hit && hits_critical(p.b, pt.frac)) {
      t.critical_hit = static_cast<std::size_t>(j);
      prod.multiply(0.0);
    } else {
      prod.multiply(math::deriv(pt.frac, p.b));
    }
    t.points.push_back(pt.frac);
    t.space_derivs.push_back(prod.value());
    t.log_space_derivs.push_back(prod.log_value());
    t.param_derivs.push_back(da);
    if (opts.keep_lifts) t.lifts.push_back(pt);
  }
  t.log_mode = prod.log_mode();
  return t;
}

OrbitTrace iterate_critical(const MapParams& p, int n, TraceOptions opts) {
  return iterate_from(p, kCritical, n, opts);
}

double comparability_sum(const OrbitTrace& trace, int n) {
  if (n < 1 || static_cast<std::size_t>(n) > trace.space_derivs.size()) {
    throw Error(ErrorKind::InvalidArgument, "comparability_sum needs 1 <= n <= trace length");
  }
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = trace.space_derivs[static_cast<std::size_t>(k)];
    if (d == 0.0) throw Error(ErrorKind::DegenerateDerivative, "partial product vanishes at k=" + std::to_string(k));
    sum += 1.0 / d;
  }
  return sum;
}

double comparability_ratio(const MapParams& p, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "comparability_ratio needs n >= 1");
  const OrbitTrace t = iterate_critical(p, n);
  for (int k = 0; k < n; ++k) {
    if (t.space_derivs[static_cast<std::size_t>(k)] == 0.0) {
      throw Error(ErrorKind::DegenerateDerivative,
                  "critical orbit hits c at j=" + std::to_string(k));
    }
  }
  return t.param_derivs[static_cast<std::size_t>(n)] / t.space_derivs[static_cast<std::size_t>(n - 1)];
}

double lyapunov_critical(const MapParams& p, long n, long burn_in) {
  if (burn_in < 0 || n <= burn_in) {
    throw Error(ErrorKind::InvalidArgument, "lyapunov_critical needs n > burn_in >= 0");
  }
  double x = kCritical;
  double sum = 0.0;
  for (long j = 1; j <= n; ++j) {
    x = math::wrap(math::lift(x, p.a, p.b));
    if (j <= burn_in) continue;
    const double d = math::deriv(x, p.b);
    if (d <= 0.0 || hits_critical(p.b, x)) {
      throw Error(ErrorKind::NonPositiveDerivative, "f' vanishes on the critical orbit at j=" + std::to_string(j));
    }
    sum += std::log(d);
  }
  return sum / static_cast<double>(n - burn_in);
}

double xi(double a, double b, int n) {
  double x = kCritical;
  for (int j = 0; j < n; ++j) x = math::wrap(math::lift(x, a, b));
  return x;
}

LiftPoint xi_lift(double a, double b, int n) {
  LiftPoint pt = LiftPoint::from(kCritical);
  for (int j = 0; j < n; ++j) pt = advance(pt, a, b);
  return pt;
}

double critical_derivative(double a, double b, int n) {
  double x = kCritical;
  DerivativeProduct prod;
  for (int j = 1; j < n; ++j) {
    x = math::wrap(math::lift(x, a, b));
    prod.multiply(math::deriv(x, b));
  }
  return prod.value();
}

HighReal iterate_high(const HighReal& a, const HighReal& b, HighReal x, int n) {
  for (int j = 0; j < n; ++j) x = math::wrap(math::lift(x, a, b));
  return x;
}

HighReal orbit_derivative_high(const HighReal& a, const HighReal& b, HighReal x, int n) {
  HighReal prod = 1;
  for (int j = 0; j < n; ++j) {
    prod *= math::deriv(x, b);
    x = math::wrap(math::lift(x, a, b));
  }
  return prod;
}

}  // namespace dsm
