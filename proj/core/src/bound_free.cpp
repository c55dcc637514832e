#include "dsm/bound_free.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsm/errors.hpp"

namespace dsm {

namespace {

bool inside(const Interval& window, double x) {
  if (!(window.hi > window.lo)) return false;
  const double xr = math::wrap(x);
  // Windows around c never straddle 0 in practice; test the nearest lift.
  for (double shift : {-1.0, 0.0, 1.0}) {
    const double y = xr + shift;
    if (window.lo < y && y < window.hi) return true;
  }
  return false;
}

}  // namespace

BoundPeriodResult beta_bound_period(const MapParams& p, double x, double beta, int j_max) {
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
  if (math::circle_dist(x, kCritical) == 0.0) throw Error(ErrorKind::InfiniteBound, "x = c is bound forever");
  double xj = math::wrap(x);
  double cj = kCritical;
  double log_d = 0.0;
  BoundPeriodResult out;
  for (int j = 1; j <= j_max; ++j) {
    log_d += std::log(math::deriv(xj, p.b));
    xj = math::wrap(math::lift(xj, p.a, p.b));
    cj = math::wrap(math::lift(cj, p.a, p.b));
    const double gap = math::circle_dist(xj, cj);
    if (gap > std::exp(-beta * j)) {
      out.p = j - 1;
      out.exit_gap = gap;
      out.log_recovery_deriv = log_d;
      out.recovery_deriv = std::exp(log_d);
      return out;
    }
  }
  out.p = j_max;
  out.capped = true;
  out.log_recovery_deriv = log_d;
  out.recovery_deriv = std::exp(log_d);
  return out;
}

BoundPeriodResult beta_bound_period_high(const HighReal& a, const HighReal& b, const HighReal& x, double beta,
                                         int j_max) {
  if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
  const HighReal c = HighReal(1) / 2;
  if (math::circle_dist(x, c) == 0) throw Error(ErrorKind::InfiniteBound, "x = c is bound forever");
  HighReal xj = math::wrap(x);
  HighReal cj = c;
  double log_d = 0.0;
  BoundPeriodResult out;
  for (int j = 1; j <= j_max; ++j) {
    log_d += static_cast<double>(log(math::deriv(xj, b)));
    xj = math::wrap(math::lift(xj, a, b));
    cj = math::wrap(math::lift(cj, a, b));
    const double gap = static_cast<double>(math::circle_dist(xj, cj));
    if (gap > std::exp(-beta * j)) {
      out.p = j - 1;
      out.exit_gap = gap;
      out.log_recovery_deriv = log_d;
      out.recovery_deriv = std::exp(log_d);
      return out;
    }
  }
  out.p = j_max;
  out.capped = true;
  out.log_recovery_deriv = log_d;
  out.recovery_deriv = std::exp(log_d);
  return out;
}

ParamBoundResult param_bound_period(Interval omega, double b, int n, double a_mid, const ReturnWindow& w,
                                    const ParamBoundOptions& opts) {
  if (omega.hi < omega.lo) throw Error(ErrorKind::EmptyInterval, "omega has hi < lo");
  if (n < 0) throw Error(ErrorKind::InvalidArgument, "n must be >= 0");
  const int na = omega.width() > 0.0 ? std::max(2, opts.a_samples) : 1;
  const int nx = omega.width() > 0.0 ? std::max(2, opts.x_samples) : 1;

  std::vector<double> as;
  for (int i = 0; i < na; ++i) as.push_back(na == 1 ? omega.lo : omega.lo + omega.width() * i / (na - 1));
  if (na > 1) as.back() = omega.hi;

  const LiftPoint lo = xi_lift(omega.lo, b, n);
  const LiftPoint hi = xi_lift(omega.hi, b, n);
  const double span = lift_difference(hi, lo);
  std::vector<double> xs;
  for (int i = 0; i < nx; ++i) xs.push_back(math::wrap(nx == 1 ? lo.frac : lo.frac + span * i / (nx - 1)));
  if (nx > 1) xs.back() = hi.frac;

  const double reach = w.r_delta1() ? w.delta1() : w.delta();
  for (double x : xs) {
    if (!(math::circle_dist(x, kCritical) < reach)) {
      throw Error(ErrorKind::NonReturn, "xi_n(omega) leaves the return window at x=" + std::to_string(x));
    }
  }

  std::vector<double> orbit;
  std::vector<double> pair_a;
  for (double a : as) {
    for (double x : xs) {
      orbit.push_back(x);
      pair_a.push_back(a);
    }
  }
  double cj = kCritical;
  for (int j = 1; j <= opts.j_max; ++j) {
    cj = math::wrap(math::lift(cj, a_mid, b));
    const double bound = std::exp(-4.0 * std::sqrt(static_cast<double>(j)));
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      orbit[i] = math::wrap(math::lift(orbit[i], pair_a[i], b));
      if (math::circle_dist(orbit[i], cj) > bound) return {j - 1, false};
    }
  }
  return {opts.j_max, true};
}

std::vector<double> uniform_grid(int count) {
  std::vector<double> g(static_cast<std::size_t>(std::max(0, count)));
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = (i + 0.5) / count;
  return g;
}

OutsideExpansionEstimate outside_expansion_stats(const MapParams& p, Interval window, const std::vector<double>& x_grid,
                                                 int n_max, const OutsideExpansionOptions& opts) {
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be >= 1");
  OutsideExpansionEstimate est;
  est.window = window;

  struct Orbit {
    double x0;
    int free_len;  // number of free steps observed
    bool censored;
    double final_log;
  };
  std::vector<Orbit> orbits;
  for (double x0 : x_grid) {
    if (inside(window, x0)) continue;
    double x = math::wrap(x0);
    double log_d = 0.0;
    Orbit o{x0, n_max, true, 0.0};
    for (int k = 1; k <= n_max; ++k) {
      log_d += std::log(math::deriv(x, p.b));
      x = math::wrap(math::lift(x, p.a, p.b));
      if (inside(window, x)) {
        o.free_len = k;
        o.censored = false;
        break;
      }
    }
    o.final_log = log_d;
    if (!o.censored) {
      const double hit = std::exp(log_d);
      est.min_hit_deriv = est.min_hit_deriv ? std::min(*est.min_hit_deriv, hit) : hit;
    }
    orbits.push_back(o);
  }
  if (orbits.empty()) throw Error(ErrorKind::InvalidArgument, "no grid point lies outside the window");
  est.samples = orbits.size();

  std::size_t censored = 0;
  double k_cens = std::numeric_limits<double>::infinity();
  double k_all = std::numeric_limits<double>::infinity();
  for (const Orbit& o : orbits) {
    const double rate = o.final_log / o.free_len;
    k_all = std::min(k_all, rate);
    if (o.censored) {
      ++censored;
      k_cens = std::min(k_cens, rate);
    }
  }
  est.censored_fraction = static_cast<double>(censored) / static_cast<double>(orbits.size());
  est.kappa1_hat = (censored > 0 ? k_cens : k_all) - opts.margin;

  // Second pass over the free segments for C_2 and M_1.
  double c2_log = std::numeric_limits<double>::infinity();
  int last_violation = 0;
  for (const Orbit& o : orbits) {
    double x = math::wrap(o.x0);
    double log_d = 0.0;
    for (int k = 1; k <= o.free_len; ++k) {
      log_d += std::log(math::deriv(x, p.b));
      x = math::wrap(math::lift(x, p.a, p.b));
      const double excess = log_d - est.kappa1_hat * k;
      c2_log = std::min(c2_log, excess);
      if (excess < 0.0) last_violation = std::max(last_violation, k);
    }
  }
  est.c2_hat = std::exp(c2_log);
  est.m1_hat = last_violation + 1;
  return est;
}

double bound_distortion_ratio(const HighReal& a0, const HighReal& x, int p, double beta) {
  if (p < 0) throw Error(ErrorKind::InvalidArgument, "p must be >= 0");
  const HighReal b = 1;
  const BoundPeriodResult bound = beta_bound_period_high(a0, b, x, beta, p + 1);
  if (bound.p < p) {
    throw Error(ErrorKind::InvalidArgument,
                "x is beta-bound only up to " + std::to_string(bound.p) + " < p=" + std::to_string(p));
  }
  const HighReal c = HighReal(1) / 2;
  HighReal xj = math::wrap(math::lift(x, a0, b));
  HighReal cj = math::wrap(math::lift(c, a0, b));
  double log_ratio = 0.0;
  double worst = 0.0;
  for (int k = 1; k <= p; ++k) {
    const HighReal dc = math::deriv(cj, b);
    if (dc == 0) throw Error(ErrorKind::DegenerateDerivative, "critical orbit hits c at k=" + std::to_string(k));
    log_ratio += static_cast<double>(log(HighReal(math::deriv(xj, b) / dc)));
    worst = std::max(worst, std::abs(log_ratio));
    xj = math::wrap(math::lift(xj, a0, b));
    cj = math::wrap(math::lift(cj, a0, b));
  }
  return std::exp(worst);
}

double bound_distortion_ratio(const MtParameter& mt, double x, int p, double beta) {
  const unsigned bits = 256 + 3 * static_cast<unsigned>(std::max(0, p));
  PrecisionScope scope(bits);
  const HighReal a0 = refine_mt_high(mt, bits);
  return bound_distortion_ratio(a0, HighReal(x), p, beta);
}

double global_distortion_ratio(double a, double a_prime, double b, int k) {
  if (k < 0) throw Error(ErrorKind::InvalidArgument, "k must be >= 0");
  double x = math::wrap(math::lift(kCritical, a, b));
  double y = math::wrap(math::lift(kCritical, a_prime, b));
  double log_ratio = 0.0;
  for (int j = 1; j <= k; ++j) {
    const double dx = math::deriv(x, b);
    const double dy = math::deriv(y, b);
    if (dx == 0.0 || dy == 0.0) throw Error(ErrorKind::DegenerateDerivative, "critical orbit hits c");
    log_ratio += std::log(dx) - std::log(dy);
    x = math::wrap(math::lift(x, a, b));
    y = math::wrap(math::lift(y, a_prime, b));
  }
  return std::exp(std::abs(log_ratio));
}

RecoveryReport recovery_check(const MapParams& p, double x, const BoundPeriodResult& bound, double beta,
                              double kappa_tilde) {
  (void)p;
  RecoveryReport rep;
  const double d = math::circle_dist(x, kCritical);
  rep.r = static_cast<int>(std::floor(-std::log(d)));
  rep.deriv = bound.recovery_deriv;
  rep.log_deriv = bound.log_recovery_deriv;
  rep.log_ratio_sqrt = rep.log_deriv - (rep.r - 4.0 * std::sqrt(static_cast<double>(bound.p)));
  rep.log_ratio_kappa = rep.log_deriv - kappa_tilde * bound.p / 4.0;
  rep.exit_consistent = bound.capped || bound.exit_gap > std::exp(-beta * (bound.p + 1));
  return rep;
}

double default_beta(const MtParameter& mt, const ReturnWindow& w, int grid, int n_max) {
  const double reach = w.r_delta1() ? w.delta1() : w.delta();
  const OutsideExpansionEstimate est = outside_expansion_stats(
      MapParams(mt.a0, 1.0), {kCritical - reach, kCritical + reach}, uniform_grid(grid), n_max);
  if (!(est.kappa1_hat > 0.0)) throw Error(ErrorKind::SolverFailure, "fitted kappa_5 is not positive");
  return std::min(mt.kappa_tilde, est.kappa1_hat) / 100.0;
}

std::vector<BoundLawSample> audit_bound_period_law(const MtParameter& mt, double beta, const std::vector<double>& r_values,
                                                   unsigned bits) {
  PrecisionScope scope(bits);
  const HighReal a0 = refine_mt_high(mt, bits);
  const HighReal b = 1;
  const HighReal c = HighReal(1) / 2;
  std::vector<BoundLawSample> out;
  for (double r : r_values) {
    for (int side : {-1, 1}) {
      const HighReal x = c + side * exp(HighReal(-r));
      const BoundPeriodResult res = beta_bound_period_high(a0, b, x, beta, kBoundPeriodCap);
      BoundLawSample s;
      s.r = r;
      s.side = side;
      s.p = res.p;
      s.capped = res.capped;
      s.bound = 4.0 * r / mt.kappa_tilde;
      s.violated = res.capped || !(s.p < s.bound);
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace dsm
