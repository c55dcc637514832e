#include "dsm/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dsm/errors.hpp"
#include "dsm/format.hpp"
#include "dsm/map_math.hpp"
#include "dsm/mt_finder.hpp"
#include "dsm/parallel.hpp"

namespace dsm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Products rounded toward zero / toward +inf using the exact fma residual.
double mul_down(double x, double y) {
  const double p = x * y;
  return std::fma(x, y, -p) < 0.0 ? std::nextafter(p, 0.0) : p;
}

double mul_up(double x, double y) {
  const double p = x * y;
  return std::fma(x, y, -p) > 0.0 ? std::nextafter(p, kInf) : p;
}

double deriv_slop(double b) { return b == 0.0 ? 0.0 : 1e-14 * b + 1e-15; }

double image_slop(double y, double b) { return 1e-15 * (1.0 + std::abs(y)) + 1e-14 * b; }

struct CellBound {
  double lower = 1.0;
  double upper = 1.0;
  bool wide = false;  // an image grew past 1/2 before N steps
};

CellBound propagate(const MapParams& p, double lo, double hi, int N) {
  CellBound out;
  Interval j{lo, hi};
  for (int k = 0; k < N; ++k) {
    const double shift = std::floor(j.lo);
    j = {j.lo - shift, j.hi - shift};
    if (j.width() > 0.5) {
      out.wide = true;
      return out;
    }
    const Interval d = derivative_bounds(p, j);
    out.lower = mul_down(out.lower, d.lo);
    out.upper = mul_up(out.upper, d.hi);
    if (k + 1 < N) {
      const double yl = math::lift(j.lo, p.a, p.b);
      const double yh = math::lift(j.hi, p.a, p.b);
      j = {yl - image_slop(yl, p.b), yh + image_slop(yh, p.b)};
    }
  }
  return out;
}

double exact_period_check(double a, double b, double x, int q) {
  // distance of f^d(x) from x over proper divisors d of q
  double worst = kInf;
  double y = x;
  for (int d = 1; d < q; ++d) {
    y = math::wrap(math::lift(y, a, b));
    if (q % d == 0) worst = std::min(worst, circle_dist(y, x));
  }
  return worst;
}

}  // namespace

Interval derivative_bounds(const MapParams& p, Interval j) {
  const double shift = std::floor(j.lo);
  const double lo = j.lo - shift;
  const double hi = j.hi - shift;
  const double s = deriv_slop(p.b);
  const double dl = math::deriv(lo, p.b);
  const double dh = math::deriv(hi, p.b);
  const bool has_half = (lo <= 0.5 && hi >= 0.5) || hi >= 1.5;
  const bool has_zero = lo == 0.0 || hi >= 1.0;
  const double mn = has_half ? 2.0 - 2.0 * p.b : std::min(dl, dh);
  const double mx = has_zero ? 2.0 + 2.0 * p.b : std::max(dl, dh);
  return {std::max(0.0, mn - s), mx + s};
}

CertifyResult certify_uniform(const MapParams& p, int N, double lambda_target, const CertifyOptions& opts) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "certify needs N >= 1");
  if (!(lambda_target > 1.0)) throw Error(ErrorKind::InvalidArgument, "certify needs lambda_target > 1");
  std::vector<Interval> level{{0.0, 1.0}};
  ExpansionCertificate cert;
  cert.params = p;
  cert.N = N;
  cert.lambda = kInf;
  for (int depth = 0;; ++depth) {
    std::vector<Interval> next;
    double undecided_lower = kInf;
    for (const Interval& cell : level) {
      const CellBound cb = propagate(p, cell.lo, cell.hi, N);
      if (!cb.wide && cb.lower >= lambda_target) {
        cert.lambda = std::min(cert.lambda, cb.lower);
        cert.cells += 1;
        cert.max_cell_width = std::max(cert.max_cell_width, cell.width());
        continue;
      }
      if (!cb.wide && cb.upper < 1.0) {
        const double x = cell.mid();
        PrecisionScope scope(106);
        const HighReal d = orbit_derivative_high(HighReal(p.a), HighReal(p.b), HighReal(x), N);
        if (d < 1) {
          Refutation r;
          r.params = p;
          r.N = N;
          r.witness = x;
          r.upper_bound = cb.upper;
          r.recomputed = d.convert_to<double>();
          return r;
        }
      }
      undecided_lower = std::min(undecided_lower, cb.wide ? 0.0 : cb.lower);
      next.push_back({cell.lo, cell.mid()});
      next.push_back({cell.mid(), cell.hi});
    }
    if (next.empty()) return cert;
    if (depth >= opts.max_depth || next.size() > opts.max_cells) {
      Inconclusive inc;
      inc.params = p;
      inc.N = N;
      inc.depth = depth;
      inc.cells = cert.cells + next.size() / 2;
      inc.best_lower = undecided_lower;
      return inc;
    }
    level = std::move(next);
  }
}

std::string to_string(CellClass c) {
  switch (c) {
    case CellClass::Tongue: return "tongue";
    case CellClass::Neutral: return "neutral";
    case CellClass::ExpandingCandidate: return "expanding_candidate";
    case CellClass::CertifiedExpanding: return "certified_expanding";
    case CellClass::Undecided: return "undecided";
  }
  return "unknown";
}

PlaneCell classify_point(double a, double b, const ClassifyOptions& opts) {
  PlaneCell cell;
  cell.a = a;
  cell.b = b;
  cell.diag.iterations = opts.max_iter;
  if (!std::isfinite(a) || !(b >= 0.0 && b <= 1.0)) {
    cell.diag.iterations = 0;
    cell.diag.note = "parameters out of range";
    return cell;
  }
  // a is a circle parameter; a = 1 is a = 0
  const MapParams p(math::wrap(a), b);

  double x = kCritical;
  for (int j = 0; j < opts.max_iter; ++j) x = math::wrap(math::lift(x, a, b));

  int q = 0;
  double y = x;
  double best = kInf;
  for (int k = 1; k <= opts.period_cap; ++k) {
    y = math::wrap(math::lift(y, a, b));
    const double d = circle_dist(y, x);
    best = std::min(best, d);
    if (d < opts.tol) {
      q = k;
      break;
    }
  }
  cell.diag.recurrence_dist = best;

  if (q > 0) {
    // Newton on F^q(x) - x - w near the recurrent point.
    double z = x;
    double lifted = z;
    for (int k = 0; k < q; ++k) lifted = math::lift(lifted, a, b);
    const double w = std::round(lifted - z);
    for (int it = 0; it < 30; ++it) {
      double v = z;
      double dv = 1.0;
      for (int k = 0; k < q; ++k) {
        dv *= math::deriv(v, b);
        v = math::lift(v, a, b);
      }
      const double g = v - z - w;
      if (std::abs(dv - 1.0) < 1e-12) break;
      const double step = g / (dv - 1.0);
      const double nz = z - step;
      if (!std::isfinite(nz) || circle_dist(math::wrap(nz), x) > 1e-3) break;
      z = nz;
      if (std::abs(step) < 1e-16) break;
    }
    double mult = 1.0;
    double v = math::wrap(z);
    for (int k = 0; k < q; ++k) {
      mult *= math::deriv(v, b);
      v = math::wrap(math::lift(v, a, b));
    }
    cell.period = q;
    cell.multiplier = mult;
    if (std::abs(mult) < 1.0 - opts.tol) {
      cell.cls = CellClass::Tongue;
      return cell;
    }
    if (std::abs(std::abs(mult) - 1.0) <= opts.tol) {
      cell.cls = CellClass::Neutral;
      return cell;
    }
    cell.period = 0;
    cell.multiplier = 0.0;
    cell.diag.note = "recurrent to a repelling cycle";
  }

  double lyap = 0.0;
  try {
    lyap = lyapunov_critical(p, opts.max_iter, opts.max_iter / 10);
  } catch (const Error& e) {
    cell.diag.note = e.what();
    return cell;
  }
  cell.lyapunov = lyap;
  if (!(lyap > 0.0)) {
    cell.diag.note = "non-positive Lyapunov estimate";
    return cell;
  }
  cell.cls = CellClass::ExpandingCandidate;
  for (int N : opts.schedule) {
    cell.diag.max_N_tried = N;
    const CertifyResult r = certify_uniform(p, N, opts.lambda_target, opts.certify);
    if (const auto* c = std::get_if<ExpansionCertificate>(&r)) {
      cell.cls = CellClass::CertifiedExpanding;
      cell.cert_N = N;
      cell.cert_lambda = c->lambda;
      cell.diag.best_lambda_lower = c->lambda;
      return cell;
    }
    if (const auto* inc = std::get_if<Inconclusive>(&r)) {
      cell.diag.best_lambda_lower = std::max(cell.diag.best_lambda_lower, inc->best_lower);
    }
  }
  return cell;
}

Raster scan_plane(Interval a_range, Interval b_range, int res_a, int res_b, const ClassifyOptions& opts, int workers) {
  if (res_a < 2 || res_b < 2) throw Error(ErrorKind::InvalidArgument, "scan resolution must be at least 2 per axis");
  Raster r;
  r.a_range = a_range;
  r.b_range = b_range;
  r.res_a = res_a;
  r.res_b = res_b;
  auto node = [](Interval range, int i, int n) {
    return i == n - 1 ? range.hi : range.lo + (range.hi - range.lo) * i / (n - 1);
  };
  const std::size_t count = static_cast<std::size_t>(res_a) * static_cast<std::size_t>(res_b);
  r.cells = parallel_map(count, workers, [&](std::size_t k) {
    const int i = static_cast<int>(k % static_cast<std::size_t>(res_a));
    const int j = static_cast<int>(k / static_cast<std::size_t>(res_a));
    return classify_point(node(a_range, i, res_a), node(b_range, j, res_b), opts);
  });
  return r;
}

std::string raster_csv(const Raster& r) {
  std::ostringstream os;
  os << kRasterHeader << '\n';
  for (const PlaneCell& c : r.cells) {
    os << shortest(c.a) << ',' << shortest(c.b) << ',' << to_string(c.cls) << ',';
    const bool cyc = c.cls == CellClass::Tongue || c.cls == CellClass::Neutral;
    os << (cyc ? std::to_string(c.period) : "") << ',' << (cyc ? shortest(c.multiplier) : "") << ',';
    const bool lyap = c.cls == CellClass::ExpandingCandidate || c.cls == CellClass::CertifiedExpanding ||
                      c.cls == CellClass::Undecided;
    os << (lyap ? shortest(c.lyapunov) : "") << ',';
    if (c.cls == CellClass::CertifiedExpanding) {
      os << c.cert_N << ',' << shortest(c.cert_lambda);
    } else if (c.cls == CellClass::Undecided || c.cls == CellClass::ExpandingCandidate) {
      os << c.diag.max_N_tried << ',' << shortest(c.diag.best_lambda_lower);
    } else {
      os << ',';
    }
    os << '\n';
  }
  return os.str();
}

double min_cycle_multiplier(double a, double b, int q) {
  PeriodicOptions o;
  o.b = b;
  const PeriodicSearch s = periodic_points(a, q, o);
  double best = kInf;
  for (const PeriodicPoint& pt : s.points) {
    if (q > 1 && exact_period_check(a, b, pt.x, q) < 1e-9) continue;
    best = std::min(best, std::abs(pt.multiplier));
  }
  return best;
}

TongueTip tongue_tip(int period, Interval a_window, double b_tol, const TipOptions& opts) {
  if (period < 1) throw Error(ErrorKind::InvalidArgument, "tongue_tip needs period >= 1");
  if (!(b_tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tongue_tip needs b_tol > 0");
  if (!(a_window.hi >= a_window.lo)) throw Error(ErrorKind::InvalidArgument, "empty a-window");
  const int n = std::max(2, opts.a_grid);

  struct Best {
    double m = kInf;
    double a = 0.0;
  };
  auto search = [&](double b) {
    Best best;
    std::vector<double> grid(static_cast<std::size_t>(n));
    std::vector<double> vals(static_cast<std::size_t>(n));
    std::size_t arg = 0;
    for (int i = 0; i < n; ++i) {
      const double a = i == n - 1 ? a_window.hi : a_window.lo + (a_window.hi - a_window.lo) * i / (n - 1);
      grid[static_cast<std::size_t>(i)] = a;
      vals[static_cast<std::size_t>(i)] = min_cycle_multiplier(a, b, period);
      if (vals[static_cast<std::size_t>(i)] < best.m) {
        best = {vals[static_cast<std::size_t>(i)], a};
        arg = static_cast<std::size_t>(i);
      }
    }
    if (best.m < 1.0) return best;
    // Golden-section refinement around the best grid node.
    double lo = grid[arg == 0 ? 0 : arg - 1];
    double hi = grid[std::min(arg + 1, grid.size() - 1)];
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    double f1 = min_cycle_multiplier(x1, b, period);
    double f2 = min_cycle_multiplier(x2, b, period);
    for (int it = 0; it < opts.refine_iters && hi - lo > 1e-15; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - g * (hi - lo);
        f1 = min_cycle_multiplier(x1, b, period);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + g * (hi - lo);
        f2 = min_cycle_multiplier(x2, b, period);
      }
      if (std::min(f1, f2) < 1.0) break;
    }
    if (f1 < best.m) best = {f1, x1};
    if (f2 < best.m) best = {f2, x2};
    return best;
  };

  double lo = opts.b_lo;
  double hi = opts.b_hi;
  Best at_hi = search(hi);
  if (!(at_hi.m < 1.0)) {
    throw Error(ErrorKind::NotFound, "no attracting cycle of period " + std::to_string(period) + " at b=" + shortest(hi));
  }
  TongueTip tip;
  const Best at_lo = search(lo);
  if (at_lo.m < 1.0) {
    tip.a = at_lo.a;
    tip.b = lo;
    tip.multiplier = at_lo.m;
    return tip;
  }
  while (hi - lo > b_tol) {
    const double mid = 0.5 * (lo + hi);
    const Best m = search(mid);
    ++tip.steps;
    if (m.m < 1.0) {
      hi = mid;
      at_hi = m;
    } else {
      lo = mid;
    }
  }
  tip.a = at_hi.a;
  tip.b = hi;
  tip.multiplier = at_hi.m;
  return tip;
}

}  // namespace dsm
