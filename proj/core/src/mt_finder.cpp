#include "dsm/mt_finder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsm/errors.hpp"

namespace dsm {

namespace {

LiftPoint advance_n(LiftPoint p, double a, double b, int n) {
  for (int j = 0; j < n; ++j) p = advance(p, a, b);
  return p;
}

// F^q(x) - x for x in [0, 1].
double periodic_gap(double a, double b, int q, double x) {
  const LiftPoint start = LiftPoint::from(x);
  return lift_difference(advance_n(start, a, b, q), start);
}

double cycle_multiplier(double a, double b, int q, double x) {
  double prod = 1.0;
  for (int j = 0; j < q; ++j) {
    prod *= math::deriv(x, b);
    x = math::wrap(math::lift(x, a, b));
  }
  return prod;
}

// F^ell(Xi_m(a)) - Xi_m(a), continuous in a because the lift of xi_m is.
double mt_gap(double a, int m, int ell) {
  const LiftPoint pm = xi_lift(a, 1.0, m);
  return lift_difference(advance_n(pm, a, 1.0, ell), pm);
}

template <class Fn>
double bisect_level(Fn&& g, double lo, double hi, double level, double width) {
  double glo = g(lo) - level;
  for (int it = 0; it < 200 && hi - lo > width; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid) - level;
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return lo + 0.5 * (hi - lo);
}

struct Bracket {
  double lo;
  double hi;
  long long k;
  bool exact;  // lo itself is a root
};

// Integer-level crossings of g over the grid x_0 < ... < x_N.
std::vector<Bracket> level_brackets(const std::vector<double>& xs, const std::vector<double>& gs) {
  std::vector<Bracket> out;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double g0 = gs[i];
    const double g1 = gs[i + 1];
    if (g0 == std::floor(g0)) out.push_back({xs[i], xs[i], static_cast<long long>(g0), true});
    const double lo = std::min(g0, g1);
    const double hi = std::max(g0, g1);
    for (double k = std::ceil(lo); k <= hi; k += 1.0) {
      if ((g0 - k) * (g1 - k) < 0.0) out.push_back({xs[i], xs[i + 1], static_cast<long long>(k), false});
    }
  }
  return out;
}

double circle_residual(double a, double b, int q, double x) {
  double y = x;
  for (int j = 0; j < q; ++j) y = math::wrap(math::lift(y, a, b));
  return math::circle_dist(x, y);
}

struct HighOrbitCheck {
  bool ok = false;
  double residual = 0.0;
  double multiplier = 0.0;
  double min_dist = 0.0;
};

HighOrbitCheck verify_orbit_high(const HighReal& a, int m, int ell, double tol_crit) {
  const HighReal b = 1;
  const HighReal c = HighReal(1) / 2;
  HighReal x = c;
  HighReal min_dist = 1;
  HighReal xm;
  HighReal mult = 1;
  for (int j = 1; j <= m + ell; ++j) {
    if (j > m) mult *= math::deriv(x, b);
    x = math::wrap(math::lift(x, a, b));
    if (j == m) xm = x;
    min_dist = std::min(min_dist, HighReal(math::circle_dist(x, c)));
  }
  HighOrbitCheck r;
  r.residual = static_cast<double>(math::circle_dist(x, xm));
  r.multiplier = static_cast<double>(mult);
  r.min_dist = static_cast<double>(min_dist);
  r.ok = r.residual < 1e-10 && r.multiplier > 1.0 && r.min_dist > tol_crit;
  return r;
}

HighReal mt_gap_high(const HighReal& a, int m, int ell) {
  const HighReal b = 1;
  HighReal y = HighReal(1) / 2;
  for (int j = 0; j < m; ++j) y = math::lift(y, a, b);
  HighReal z = y;
  for (int j = 0; j < ell; ++j) z = math::lift(z, a, b);
  return HighReal(z - y);
}

}  // namespace

PeriodicSearch periodic_points(double a, int q, const PeriodicOptions& opts) {
  if (q < 1 || q > 24) throw Error(ErrorKind::InvalidArgument, "period q must lie in [1, 24]");
  const int n = opts.grid > 0 ? opts.grid : std::max(4096, 64 << q);
  std::vector<double> xs(static_cast<std::size_t>(n) + 1);
  std::vector<double> gs(xs.size());
  for (int i = 0; i <= n; ++i) {
    xs[static_cast<std::size_t>(i)] = static_cast<double>(i) / n;
    gs[static_cast<std::size_t>(i)] = periodic_gap(a, opts.b, q, xs[static_cast<std::size_t>(i)]);
  }

  PeriodicSearch out;
  const auto g = [&](double x) { return periodic_gap(a, opts.b, q, x); };
  for (const Bracket& br : level_brackets(xs, gs)) {
    double x = br.lo;
    if (!br.exact) {
      double lo = br.lo;
      double hi = br.hi;
      x = bisect_level(g, lo, hi, static_cast<double>(br.k), 1e-9);
      // Newton polish inside the bracket; fall back to full bisection.
      bool polished = false;
      for (int it = 0; it < 8; ++it) {
        const double slope = cycle_multiplier(a, opts.b, q, x) - 1.0;
        if (slope == 0.0) break;
        const double step = (g(x) - static_cast<double>(br.k)) / slope;
        const double next = x - step;
        if (!(next >= lo && next <= hi)) break;
        x = next;
        if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon()) {
          polished = true;
          break;
        }
      }
      if (!polished) x = bisect_level(g, lo, hi, static_cast<double>(br.k), 0.0);
    }
    if (x >= 1.0) continue;  // same point as x = 0
    const double res = circle_residual(a, opts.b, q, x);
    if (!(res < opts.refine_tol)) {
      out.failures.push_back({br.lo, br.hi, br.k, "residual " + std::to_string(res) + " above tolerance"});
      continue;
    }
    out.points.push_back({x, cycle_multiplier(a, opts.b, q, x)});
  }
  std::sort(out.points.begin(), out.points.end(),
            [](const PeriodicPoint& l, const PeriodicPoint& r) { return l.x < r.x; });
  std::vector<PeriodicPoint> unique;
  for (const PeriodicPoint& p : out.points) {
    if (!unique.empty() && math::circle_dist(unique.back().x, p.x) < 1e-12) continue;
    unique.push_back(p);
  }
  if (unique.size() > 1 && math::circle_dist(unique.front().x, unique.back().x) < 1e-12) unique.pop_back();
  out.points = std::move(unique);
  return out;
}

std::string to_string(MtRejection r) {
  switch (r) {
    case MtRejection::Degenerate: return "degenerate";
    case MtRejection::CriticalHit: return "critical-hit";
    case MtRejection::NonMinimalPeriod: return "non-minimal-period";
    case MtRejection::NonMinimalPreperiod: return "non-minimal-preperiod";
    case MtRejection::Residual: return "residual";
  }
  return "unknown";
}

MtSearch find_mt(int m, int ell, Interval a_range, const MtOptions& opts) {
  if (m < 1 || ell < 1) throw Error(ErrorKind::InvalidArgument, "m and ell must be >= 1");
  if (!(a_range.hi > a_range.lo)) throw Error(ErrorKind::EmptyInterval, "empty a_range");
  const int n = std::max(2, static_cast<int>(std::ceil(opts.grid_per_unit * a_range.width())));
  std::vector<double> as(static_cast<std::size_t>(n) + 1);
  std::vector<double> gs(as.size());
  for (int i = 0; i <= n; ++i) {
    const double a = i == n ? a_range.hi : a_range.lo + a_range.width() * i / n;
    as[static_cast<std::size_t>(i)] = a;
    gs[static_cast<std::size_t>(i)] = mt_gap(a, m, ell);
  }
  const auto g = [&](double a) { return mt_gap(a, m, ell); };

  MtSearch out;
  std::vector<std::pair<double, long long>> roots;
  for (const Bracket& br : level_brackets(as, gs)) {
    const double a = br.exact ? br.lo : bisect_level(g, br.lo, br.hi, static_cast<double>(br.k), opts.tol);
    roots.emplace_back(a, br.k);
  }
  // a = 1 is the parameter a = 0 again
  if (gs.back() == std::floor(gs.back()) && a_range.hi < 1.0) {
    roots.emplace_back(a_range.hi, static_cast<long long>(gs.back()));
  }

  for (const auto& [a, k] : roots) {
    const double edge = std::max(opts.tol, 1e-12);
    if (!opts.include_endpoints && (a - a_range.lo <= edge || a_range.hi - a <= edge)) continue;

    std::vector<double> orbit(static_cast<std::size_t>(m + ell) + 1);
    orbit[0] = kCritical;
    for (std::size_t j = 1; j < orbit.size(); ++j) orbit[j] = math::wrap(math::lift(orbit[j - 1], a, 1.0));
    const double ym = orbit[static_cast<std::size_t>(m)];
    double mult = 1.0;
    for (int i = 0; i < ell; ++i) mult *= math::deriv(orbit[static_cast<std::size_t>(m + i)], 1.0);
    double min_dist = 1.0;
    for (std::size_t j = 1; j < orbit.size(); ++j) min_dist = std::min(min_dist, math::circle_dist(orbit[j], kCritical));
    const double residual = math::circle_dist(orbit.back(), ym);

    MtCandidate cand{a, mult, min_dist, MtRejection::Residual};
    if (!(residual < 1e-10)) {
      out.rejected.push_back(cand);
      continue;
    }
    if (!(min_dist > opts.tol_crit)) {
      cand.reason = MtRejection::CriticalHit;
      out.rejected.push_back(cand);
      continue;
    }
    if (!(mult > 1.0 + opts.tol_rep)) {
      cand.reason = MtRejection::Degenerate;
      out.rejected.push_back(cand);
      continue;
    }
    bool minimal = true;
    for (int d = 1; d < ell; ++d) {
      if (ell % d == 0 && math::circle_dist(orbit[static_cast<std::size_t>(m + d)], ym) < 1e-8) minimal = false;
    }
    if (!minimal) {
      cand.reason = MtRejection::NonMinimalPeriod;
      out.rejected.push_back(cand);
      continue;
    }
    if (math::circle_dist(orbit[static_cast<std::size_t>(m - 1 + ell)], orbit[static_cast<std::size_t>(m - 1)]) < 1e-8) {
      cand.reason = MtRejection::NonMinimalPreperiod;
      out.rejected.push_back(cand);
      continue;
    }

    HighOrbitCheck hc;
    {
      PrecisionScope scope(opts.verify_bits);
      hc = verify_orbit_high(HighReal(a), m, ell, opts.tol_crit);
    }
    if (!hc.ok) {
      out.rejected.push_back(cand);
      continue;
    }

    MtParameter mt;
    mt.a0 = a;
    mt.m = m;
    mt.ell = ell;
    mt.periodic_point = ym;
    mt.multiplier = mult;
    mt.kappa_tilde = std::log(mult) / ell;
    mt.winding = k;
    mt.residual = residual;
    mt.verified_high = true;
    const int horizon = opts.d_bar_horizon > 0 ? opts.d_bar_horizon : 10 * (m + ell);
    mt.d_bar = critical_gap(mt, horizon).value;
    out.accepted.push_back(mt);
  }
  std::sort(out.accepted.begin(), out.accepted.end(),
            [](const MtParameter& l, const MtParameter& r) { return l.a0 < r.a0; });
  return out;
}

CriticalGap critical_gap(double a0, int J, int settle) {
  if (J < 1) throw Error(ErrorKind::InvalidArgument, "J must be >= 1");
  CriticalGap g{1.0, 0, J < settle};
  double x = kCritical;
  for (int j = 1; j <= J; ++j) {
    x = math::wrap(math::lift(x, a0, 1.0));
    const double d = math::circle_dist(x, kCritical);
    if (d < g.value) {
      g.value = d;
      g.argmin = j;
    }
  }
  return g;
}

CriticalGap critical_gap(const MtParameter& mt, int J) {
  if (J < 1) throw Error(ErrorKind::InvalidArgument, "J must be >= 1");
  // The cycle is repelling, so a double orbit drifts off it; iterate a
  // high-precision a0 with enough guard bits to absorb the growth.
  const unsigned bits = 96 + 2 * static_cast<unsigned>(J);
  PrecisionScope scope(bits);
  const HighReal a = refine_mt_high(mt, bits);
  const HighReal b = 1;
  const HighReal c = HighReal(1) / 2;
  HighReal x = c;
  CriticalGap g{1.0, 0, J < mt.m + mt.ell};
  for (int j = 1; j <= J; ++j) {
    x = math::wrap(math::lift(x, a, b));
    const double d = static_cast<double>(math::circle_dist(x, c));
    if (d < g.value) {
      g.value = d;
      g.argmin = j;
    }
  }
  return g;
}

HighReal refine_mt_high(const MtParameter& mt, unsigned bits) {
  PrecisionScope scope(bits);
  const HighReal level = static_cast<double>(mt.winding);
  const auto g = [&](const HighReal& a) { return HighReal(mt_gap_high(a, mt.m, mt.ell) - level); };
  for (double radius : {1e-11, 1e-9, 1e-7}) {
    HighReal lo = HighReal(mt.a0) - radius;
    HighReal hi = HighReal(mt.a0) + radius;
    HighReal glo = g(lo);
    const HighReal ghi = g(hi);
    if (glo == 0) return lo;
    if (ghi == 0) return hi;
    if ((glo < 0) == (ghi < 0)) continue;
    for (unsigned it = 0; it < bits + 8; ++it) {
      const HighReal mid = (lo + hi) / 2;
      const HighReal gm = g(mid);
      if (gm == 0) return mid;
      if ((gm < 0) == (glo < 0)) {
        lo = mid;
        glo = gm;
      } else {
        hi = mid;
      }
    }
    return HighReal((lo + hi) / 2);
  }
  throw Error(ErrorKind::SolverFailure, "no sign change of the MT gap near a0");
}

}  // namespace dsm
