// Splitting engine for the parameter-exclusion induction. Templated on the
// scalar so deep horizons can run in MPFR; double is the default.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dsm/errors.hpp"
#include "dsm/map_math.hpp"
#include "dsm/parallel.hpp"
#include "induction_engine.hpp"

namespace dsm::detail {

namespace {

constexpr int kParamBoundCap = 10000;
constexpr int kBetaBoundCap = 100000;
// Deletion targets sit this much (relative) outside e^{-sqrt n}, so kept
// endpoints satisfy (BA) despite rounding in the preimage solve.
constexpr double kHoleGuard = 1e-9;

template <class Real>
long long to_i64(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) {
    return static_cast<long long>(x);
  } else {
    return x.template convert_to<long long>();
  }
}

template <class Real>
double to_d(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) {
    return x;
  } else {
    return x.template convert_to<double>();
  }
}

template <class Real>
std::string exact_string(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) {
    (void)x;
    return {};
  } else {
    return x.str(0, std::ios_base::scientific);
  }
}

template <class Real>
Real parse_real(double approx, const std::string& exact) {
  if constexpr (std::is_same_v<Real, double>) {
    (void)exact;
    return approx;
  } else {
    return exact.empty() ? Real(approx) : Real(exact);
  }
}

template <class Real>
struct Lift {
  std::uint64_t turns = 0;
  Real frac = Real(0);
};

template <class Real>
int compare(const Lift<Real>& l, const Lift<Real>& r) {
  const auto dt = static_cast<std::int64_t>(l.turns - r.turns);
  if (dt != 0) return dt < 0 ? -1 : 1;
  if (l.frac == r.frac) return 0;
  return l.frac < r.frac ? -1 : 1;
}

template <class Real>
Real difference(const Lift<Real>& hi, const Lift<Real>& lo) {
  const auto dt = static_cast<std::int64_t>(hi.turns - lo.turns);
  return Real(static_cast<double>(dt)) + Real(hi.frac - lo.frac);
}

template <class Real>
Lift<Real> advance_lift(const Lift<Real>& p, const Real& a, const Real& b) {
  using std::floor;
  const Real y = math::lift(p.frac, a, b);
  const Real k = floor(y);
  Lift<Real> out;
  out.turns = 2 * p.turns + static_cast<std::uint64_t>(to_i64(k));
  out.frac = y - k;
  if (out.frac >= 1) {
    out.frac = 0;
    out.turns += 1;
  }
  return out;
}

template <class Real>
Lift<Real> critical_lift(const Real& a, const Real& b, int n) {
  Lift<Real> p;
  p.frac = Real(kCritical);
  for (int j = 0; j < n; ++j) p = advance_lift(p, a, b);
  return p;
}

template <class Real>
Real circle_dist_c(const Real& frac) {
  using std::abs;
  return Real(abs(Real(frac - Real(kCritical))));
}

template <class Real>
struct Work {
  Real lo;
  Real hi;
  ParamElement meta;
  int next_time = 1;
  bool fresh = false;  // returned at its creation time
};

enum class Kind { Outside, Cell, Hole };

template <class Real>
struct Piece {
  Lift<Real> s;
  Lift<Real> e;
  Kind kind = Kind::Outside;
  PartitionIndex idx;
  bool full = false;
  bool long_stub = true;
  std::uint64_t window_turn = 0;  // outside pieces: the window on their left
};

struct CellSpec {
  int r;
  int ell;
  double near_d;
  double far_d;
};

template <class Real>
struct CellOffsets {
  Real near_o;
  Real far_o;
  PartitionIndex idx;
  bool truncated;
};

template <class Real>
class Engine {
 public:
  Engine(const InductionConfig& cfg, EngineMode mode, int horizon, std::size_t task)
      : cfg_(cfg), mode_(mode), horizon_(horizon), task_(task), b_(Real(cfg.b)),
        delta_(exp_neg(cfg.r_delta)), stub_len_(Real(cfg.stub_scale) * cell_len(cfg.r_delta - 1)) {}

  void process(Work<Real> seed, EngineResult& out) {
    out_ = &out;
    if (mode_ != EngineMode::Step) seed.meta.id = next_id();
    std::vector<Work<Real>> stack;
    stack.push_back(std::move(seed));
    while (!stack.empty()) {
      Work<Real> w = std::move(stack.back());
      stack.pop_back();
      std::vector<Work<Real>> children = handle(w);
      for (auto it = children.rbegin(); it != children.rend(); ++it) {
        if (mode_ != EngineMode::Run && it->fresh) {
          finish(*it, ElementStatus::Active, it->meta.history.back().n);
        } else {
          stack.push_back(std::move(*it));
        }
      }
    }
  }

 private:
  static Real exp_neg(int r) {
    using std::exp;
    return Real(exp(Real(-r)));
  }

  static Real cell_len(int r) {
    using std::exp;
    const Real ar = Real(std::abs(r));
    return Real(exp(Real(-ar - 1)) * (exp(Real(1)) - 1) / (ar * ar));
  }

  std::uint64_t next_id() { return (static_cast<std::uint64_t>(task_ + 1) << 32) | ++counter_; }

  void log(int t, const ParamElement& e, const std::string& kind, const Real& lo, const Real& hi) {
    out_->log.push_back({t, e.id, kind, to_d(lo), to_d(hi), to_d(Real(hi - lo))});
  }

  void finish(Work<Real>& w, ElementStatus status, int time) {
    w.meta.status = status;
    w.meta.status_time = time;
    w.meta.lo = to_d(w.lo);
    w.meta.hi = to_d(w.hi);
    w.meta.lo_exact = exact_string(w.lo);
    w.meta.hi_exact = exact_string(w.hi);
    const std::string kind = status == ElementStatus::Survived      ? "survived"
                             : status == ElementStatus::Censored    ? "censored"
                             : status == ElementStatus::Quarantined ? "quarantined"
                                                                    : "active";
    log(time, w.meta, kind, w.lo, w.hi);
    if (status == ElementStatus::Censored || status == ElementStatus::Quarantined) {
      out_->exclusions.push_back({time, w.meta.id, w.meta.lo, to_d(Real(w.hi - w.lo)), kind});
    }
    out_->finished.push_back(w.meta);
  }

  bool meets_window(const Lift<Real>& L, const Lift<Real>& H) const {
    for (std::uint64_t k = L.turns - 1; static_cast<std::int64_t>(k - (H.turns + 1)) <= 0; ++k) {
      const Lift<Real> wlo{k, Real(Real(kCritical) - delta_)};
      const Lift<Real> whi{k, Real(Real(kCritical) + delta_)};
      if (compare(wlo, H) < 0 && compare(L, whi) < 0) return true;
    }
    return false;
  }

  // Cells of one side of I* that are not swallowed by the hole, ordered
  // from c outward, with the hole-cut cell truncated at the guarded edge.
  std::vector<CellOffsets<Real>> side_cells(const Real& h_out) const {
    using std::exp;
    std::vector<CellOffsets<Real>> cells;
    int r_max = cfg_.r_delta;
    while (exp_neg(r_max + 1) > h_out) ++r_max;
    for (int r = r_max; r >= cfg_.r_delta; --r) {
      const Real inner = exp_neg(r + 1);
      const Real len = cell_len(r);
      for (int ell = 0; ell < r * r; ++ell) {
        const Real near_o = Real(inner + Real(ell) * len);
        const Real far_o = (ell + 1 == r * r) ? exp_neg(r) : Real(inner + Real(ell + 1) * len);
        if (far_o <= h_out) continue;
        if (near_o < h_out) {
          cells.push_back({h_out, far_o, {r, ell}, true});
        } else {
          cells.push_back({near_o, far_o, {r, ell}, false});
        }
      }
    }
    return cells;
  }

  std::vector<Piece<Real>> build_pieces(const Lift<Real>& L, const Lift<Real>& H, int t, bool* has_full) const {
    using std::exp;
    using std::sqrt;
    const Real h = Real(exp(Real(-sqrt(Real(t)))));
    const Real h_out = Real(h * (1 + kHoleGuard));
    const Real c = Real(kCritical);
    std::vector<Piece<Real>> raw;
    const bool swallowed = h_out >= delta_;
    const std::vector<CellOffsets<Real>> cells = swallowed ? std::vector<CellOffsets<Real>>{} : side_cells(h_out);

    const std::uint64_t k_end = H.turns + 1;
    for (std::uint64_t k = L.turns - 1;; ++k) {
      if (swallowed) {
        raw.push_back({{k, Real(c - delta_)}, {k, Real(c + delta_)}, Kind::Hole, {}, false, false, k});
      } else {
        for (auto it = cells.rbegin(); it != cells.rend(); ++it) {
          Piece<Real> p;
          p.s = {k, Real(c - it->far_o)};
          p.e = {k, Real(c - it->near_o)};
          p.kind = Kind::Cell;
          p.idx = {-it->idx.r, it->idx.ell};
          p.full = !it->truncated;
          raw.push_back(p);
        }
        raw.push_back({{k, Real(c - h_out)}, {k, Real(c + h_out)}, Kind::Hole, {}, false, false, k});
        for (const auto& cell : cells) {
          Piece<Real> p;
          p.s = {k, Real(c + cell.near_o)};
          p.e = {k, Real(c + cell.far_o)};
          p.kind = Kind::Cell;
          p.idx = cell.idx;
          p.full = !cell.truncated;
          raw.push_back(p);
        }
      }
      if (k == k_end) break;
      Piece<Real> gap;
      gap.s = {k, Real(c + delta_)};
      gap.e = {k + 1, Real(c - delta_)};
      gap.kind = Kind::Outside;
      gap.window_turn = k;
      raw.push_back(gap);
    }

    std::vector<Piece<Real>> pieces;
    *has_full = false;
    for (Piece<Real>& p : raw) {
      if (compare(p.e, L) <= 0 || compare(p.s, H) >= 0) continue;
      bool clipped = false;
      if (compare(p.s, L) < 0) {
        p.s = L;
        clipped = true;
      }
      if (compare(p.e, H) > 0) {
        p.e = H;
        clipped = true;
      }
      if (compare(p.s, p.e) >= 0) continue;
      if (p.kind == Kind::Cell && clipped) p.full = false;
      if (p.kind == Kind::Outside) {
        const Lift<Real> left_edge{p.window_turn, Real(c + delta_)};
        const Lift<Real> left_reach{p.window_turn, Real(c + delta_ + stub_len_)};
        const Lift<Real> right_edge{p.window_turn + 1, Real(c - delta_)};
        const Lift<Real> right_reach{p.window_turn + 1, Real(c - delta_ - stub_len_)};
        const bool near_left = compare(p.s, left_edge) >= 0 && compare(p.e, left_reach) <= 0;
        const bool near_right = compare(p.e, right_edge) <= 0 && compare(p.s, right_reach) >= 0;
        p.long_stub = !(near_left || near_right);
      }
      if (p.kind == Kind::Cell && p.full) *has_full = true;
      pieces.push_back(p);
    }
    return pieces;
  }

  // a in [lo, hi] with Xi_t(a) on the requested side of target.
  Real preimage(const Work<Real>& w, int t, const Lift<Real>& target, bool want_above) const {
    Real lo = w.lo;
    Real hi = w.hi;
    const int max_iter = std::is_same_v<Real, double> ? 1100 : static_cast<int>(cfg_.precision_bits) + 16;
    for (int it = 0; it < max_iter; ++it) {
      const Real mid = Real((lo + hi) / 2);
      if (!(mid > lo && mid < hi)) break;
      if (compare(critical_lift(mid, b_, t), target) < 0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return want_above ? hi : lo;
  }

  bool monotone_samples(const Work<Real>& w, int t) const {
    const int n = std::max(3, cfg_.sample_density);
    Lift<Real> prev = critical_lift(w.lo, b_, t);
    for (int i = 1; i < n; ++i) {
      const Real a = i == n - 1 ? w.hi : Real(w.lo + (w.hi - w.lo) * Real(i) / Real(n - 1));
      const Lift<Real> cur = critical_lift(a, b_, t);
      if (compare(cur, prev) < 0) return false;
      prev = cur;
    }
    return true;
  }

  struct Bound {
    int p = 0;
    bool capped = false;
  };

  Bound param_bound(const Real& lo, const Real& hi, int t) const {
    using std::exp;
    using std::sqrt;
    const bool degenerate = !(hi > lo);
    const int na = degenerate ? 1 : std::max(2, cfg_.sample_density);
    const int nx = na;
    const Real a_mid = Real((lo + hi) / 2);
    const Lift<Real> X0 = critical_lift(lo, b_, t);
    const Lift<Real> X1 = critical_lift(hi, b_, t);
    const Real span = difference(X1, X0);
    std::vector<Real> orbit;
    std::vector<Real> pa;
    for (int i = 0; i < na; ++i) {
      const Real a = na == 1 ? lo : (i == na - 1 ? hi : Real(lo + (hi - lo) * Real(i) / Real(na - 1)));
      for (int k = 0; k < nx; ++k) {
        const Real x = nx == 1 ? X0.frac : (k == nx - 1 ? X1.frac : math::wrap(Real(X0.frac + span * Real(k) / Real(nx - 1))));
        orbit.push_back(x);
        pa.push_back(a);
      }
    }
    Real cj = Real(kCritical);
    for (int j = 1; j <= kParamBoundCap; ++j) {
      cj = math::wrap(math::lift(cj, a_mid, b_));
      const Real bound = Real(exp(Real(-4 * sqrt(Real(j)))));
      for (std::size_t i = 0; i < orbit.size(); ++i) {
        orbit[i] = math::wrap(math::lift(orbit[i], pa[i], b_));
        if (math::circle_dist(orbit[i], cj) > bound) return {j - 1, false};
      }
    }
    return {kParamBoundCap, true};
  }

  int beta_bound(const Real& a, int t) const {
    using std::exp;
    if (!(cfg_.beta > 0.0)) return 0;
    Real x = critical_lift(a, b_, t).frac;
    Real cj = Real(kCritical);
    if (math::circle_dist(x, cj) == 0) return kBetaBoundCap;
    for (int j = 1; j <= kBetaBoundCap; ++j) {
      x = math::wrap(math::lift(x, a, b_));
      cj = math::wrap(math::lift(cj, a, b_));
      if (to_d(math::circle_dist(x, cj)) > std::exp(-cfg_.beta * j)) return j - 1;
    }
    return kBetaBoundCap;
  }

  void fit_startup(const Real& lo, const Real& hi, int n0) {
    using std::exp;
    using std::log;
    const int samples = std::max(2, cfg_.sample_density);
    for (int s = 0; s < samples; ++s) {
      const Real a = s == 0 ? lo : (s == samples - 1 ? hi : Real(lo + (hi - lo) * Real(s) / Real(samples - 1)));
      Lift<Real> p;
      p.frac = Real(kCritical);
      double log_d = 0.0;
      for (int nu = 1; nu < n0; ++nu) {
        p = advance_lift(p, a, b_);
        log_d += to_d(Real(log(math::deriv(p.frac, b_))));
        const double c1 = log_d - std::pow(nu, 2.0 / 3.0);
        const double c7 = to_d(Real(log(circle_dist_c(p.frac)))) + std::sqrt(static_cast<double>(nu));
        if (out_->fit_samples == 0) {
          out_->C1 = c1;
          out_->C7 = c7;
        } else {
          out_->C1 = std::min(out_->C1, c1);
          out_->C7 = std::min(out_->C7, c7);
        }
        ++out_->fit_samples;
      }
    }
  }

  // Updates the free-orbit length of the element's last return.
  static void close_free_orbit(ParamElement& meta, int t) {
    if (meta.history.empty()) return;
    ReturnRecord& last = meta.history.back();
    if (last.s0 < 0) last.s0 = t - (last.n + last.p + 1);
  }

  Work<Real> make_child(const Work<Real>& parent, const Real& lo, const Real& hi, int t,
                        std::optional<ReturnKind> kind, PartitionIndex idx) {
    Work<Real> child;
    child.lo = lo;
    child.hi = hi;
    child.meta = parent.meta;
    child.meta.parent = parent.meta.id;
    child.meta.id = next_id();
    child.meta.status = ElementStatus::Active;
    if (!kind) {
      child.next_time = t + 1;
      log(t, child.meta, "free", lo, hi);
      return child;
    }
    close_free_orbit(child.meta, t);
    ReturnRecord rec;
    rec.n = t;
    rec.idx = idx;
    rec.kind = *kind;
    const Bound bp = param_bound(lo, hi, t);
    rec.p = bp.p;
    rec.p_capped = bp.capped;
    rec.p_beta = beta_bound(Real((lo + hi) / 2), t);
    if (child.meta.n0 < 0) {
      child.meta.n0 = t;
      fit_startup(lo, hi, t);
    }
    child.meta.history.push_back(rec);
    child.fresh = true;
    out_->returns.push_back(rec);
    child.next_time = t + rec.p + 1;
    log(t, child.meta, *kind == ReturnKind::Essential ? "essential-return" : "inessential-return", lo, hi);
    return child;
  }

  std::vector<Work<Real>> split(Work<Real>& w, int t, const std::vector<Piece<Real>>& pieces, bool essential) {
    const bool startup = w.meta.n0 < 0;
    const std::size_t n = pieces.size();
    std::vector<std::size_t> uf(n);
    std::iota(uf.begin(), uf.end(), 0);
    auto find = [&](std::size_t i) {
      while (uf[i] != i) i = uf[i] = uf[uf[i]];
      return i;
    };
    auto unite = [&](std::size_t i, std::size_t j) { uf[find(i)] = find(j); };

    auto rank = [&](std::size_t i) -> int {
      const Piece<Real>& p = pieces[i];
      if (p.kind == Kind::Hole) return -1;
      if (p.kind == Kind::Cell) return p.full ? 3 : 2;
      return p.long_stub ? 0 : 1;
    };

    if (essential) {
      // Partial cells join the best non-hole neighbour; short stubs join a
      // neighbouring cell.
      for (std::size_t i = 0; i < n; ++i) {
        const int ri = rank(i);
        if (ri != 2 && ri != 1) continue;
        std::size_t best = n;
        int best_rank = -1;
        for (std::size_t j : {i - 1, i + 1}) {
          if (j >= n) continue;
          const int rj = rank(j);
          if (rj < 0 || (ri == 1 && rj < 2)) continue;
          if (rj > best_rank) {
            best = j;
            best_rank = rj;
          }
        }
        if (best < n) unite(i, best);
      }
    } else {
      for (std::size_t i = 0; i + 1 < n; ++i) {
        if (rank(i) >= 0 && rank(i + 1) >= 0) unite(i, i + 1);
      }
    }

    std::vector<Real> cuts(n + 1);
    cuts[0] = w.lo;
    cuts[n] = w.hi;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const bool above = pieces[i].kind == Kind::Hole;
      cuts[i + 1] = preimage(w, t, pieces[i].e, above);
    }
    for (std::size_t i = 1; i <= n; ++i) {
      if (cuts[i] < cuts[i - 1]) cuts[i] = cuts[i - 1];
    }
    if (cuts[n] > w.hi) cuts[n] = w.hi;

    SplitEvent ev;
    ev.time = t;
    ev.element = w.meta.id;
    ev.startup = startup;
    ev.kind = essential ? ReturnKind::Essential : ReturnKind::Inessential;
    ev.parent_measure = to_d(Real(w.hi - w.lo));
    Real inside = 0;
    Real deleted = 0;
    Real kept = 0;
    std::vector<Work<Real>> children;

    std::size_t i = 0;
    while (i < n) {
      const Real lo = cuts[i];
      if (pieces[i].kind == Kind::Hole) {
        const Real hi = cuts[i + 1];
        const Real m = Real(hi - lo);
        deleted += m;
        inside += m;
        const std::string cause = startup ? "ba-startup" : (essential ? "ba-essential" : "ba-inessential");
        if (m > 0) {
          out_->exclusions.push_back({t, w.meta.id, to_d(lo), to_d(m), cause});
          log(t, w.meta, "delete", lo, hi);
        }
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < n && pieces[j + 1].kind != Kind::Hole && find(j + 1) == find(i)) ++j;
      const Real hi = cuts[j + 1];
      bool has_full = false;
      bool has_long = false;
      bool has_cell = false;
      PartitionIndex idx;
      for (std::size_t k = i; k <= j; ++k) {
        const Piece<Real>& p = pieces[k];
        if (p.kind == Kind::Cell) {
          inside += Real(cuts[k + 1] - cuts[k]);
          if (p.full && !has_full) {
            has_full = true;
            idx = p.idx;
          } else if (!has_cell && !has_full) {
            idx = p.idx;
          }
          has_cell = true;
        } else if (p.long_stub) {
          has_long = true;
        }
      }
      const Real m = Real(hi - lo);
      kept += m;
      if (m > 0) {
        std::optional<ReturnKind> kind;
        if (has_full) {
          kind = ReturnKind::Essential;
        } else if (!has_long && has_cell && !startup) {
          kind = ReturnKind::Inessential;
        }
        if (!essential && has_cell) kind = ReturnKind::Inessential;
        if (startup && kind == ReturnKind::Inessential) kind.reset();
        for (std::size_t k = i; k <= j; ++k) {
          const Piece<Real>& p = pieces[k];
          const bool adjoined = (p.kind == Kind::Cell && !p.full) || (p.kind == Kind::Outside && !p.long_stub);
          if (adjoined && j > i) adjoined_ += to_d(Real(cuts[k + 1] - cuts[k]));
        }
        children.push_back(make_child(w, lo, hi, t, kind, idx));
      }
      i = j + 1;
    }

    ev.inside_measure = to_d(inside);
    ev.deleted_measure = to_d(deleted);
    ev.children_measure = to_d(kept);
    ev.children = static_cast<int>(children.size());
    const double parent = ev.parent_measure;
    ev.conservation_error = parent > 0 ? std::abs(ev.children_measure + ev.deleted_measure - parent) / parent : 0.0;
    out_->max_split_error = std::max(out_->max_split_error, ev.conservation_error);
    if (startup && ev.inside_measure > 0) {
      using std::exp;
      using std::sqrt;
      const double envelope = to_d(Real(exp(Real(-sqrt(Real(t)))) / delta_));
      out_->K_startup = std::max(out_->K_startup, (ev.deleted_measure / ev.inside_measure) / envelope);
    }
    out_->splits.push_back(ev);
    return children;
  }

  std::vector<Work<Real>> handle(Work<Real>& w) {
    const int t0 = w.next_time;
    if (t0 > horizon_) {
      finish(w, (w.meta.n0 < 0 && mode_ == EngineMode::Startup) ? ElementStatus::Censored : ElementStatus::Survived,
             horizon_);
      return {};
    }
    Lift<Real> L = critical_lift(w.lo, b_, t0);
    Lift<Real> H = critical_lift(w.hi, b_, t0);
    const Real width = Real(w.hi - w.lo);
    for (int t = t0; t <= horizon_; ++t) {
      if (t > t0) {
        L = advance_lift(L, w.lo, b_);
        H = advance_lift(H, w.hi, b_);
      }
      const Real span = difference(H, L);
      if (span < 0) {
        log(t, w.meta, "lost-monotonicity", w.lo, w.hi);
        finish(w, ElementStatus::Quarantined, t);
        return {};
      }
      if (w.meta.n0 < 0 && span < Real(width * Real(1 - 1e-6))) {
        throw Error(ErrorKind::BTooSmall, "parameter image shorter than the parameter interval at n=" + std::to_string(t));
      }
      if (!meets_window(L, H)) continue;
      bool has_full = false;
      const std::vector<Piece<Real>> pieces = build_pieces(L, H, t, &has_full);
      const bool startup = w.meta.n0 < 0;
      if (startup && !has_full) continue;
      if (!monotone_samples(w, t)) {
        log(t, w.meta, "lost-monotonicity", w.lo, w.hi);
        finish(w, ElementStatus::Quarantined, t);
        return {};
      }
      const bool touches_hole =
          std::any_of(pieces.begin(), pieces.end(), [](const Piece<Real>& p) { return p.kind == Kind::Hole; });
      if (!has_full && !touches_hole) {
        // Inessential return, element continues whole.
        PartitionIndex idx;
        for (const Piece<Real>& p : pieces) {
          if (p.kind == Kind::Cell) {
            idx = p.idx;
            break;
          }
        }
        std::vector<Work<Real>> one;
        Work<Real> child = make_child(w, w.lo, w.hi, t, ReturnKind::Inessential, idx);
        child.meta.id = w.meta.id;
        child.meta.parent = w.meta.parent;
        one.push_back(std::move(child));
        return one;
      }
      return split(w, t, pieces, has_full);
    }
    if (mode_ == EngineMode::Startup && w.meta.n0 < 0) {
      finish(w, ElementStatus::Censored, horizon_);
    } else {
      finish(w, ElementStatus::Survived, horizon_);
    }
    return {};
  }

 public:
  double adjoined() const { return adjoined_; }

 private:
  const InductionConfig& cfg_;
  EngineMode mode_;
  int horizon_;
  std::size_t task_;
  Real b_;
  Real delta_;
  Real stub_len_;
  std::uint64_t counter_ = 0;
  EngineResult* out_ = nullptr;
  double adjoined_ = 0.0;
};

template <class Real>
EngineResult run_typed(const InductionConfig& cfg, const EngineInput& input) {
  std::vector<Work<Real>> seeds;
  if (input.mode == EngineMode::Step) {
    if (input.seed == nullptr) throw Error(ErrorKind::InvalidArgument, "step needs a seed element");
    const ParamElement& e = *input.seed;
    if (e.history.empty()) throw Error(ErrorKind::InvalidArgument, "step needs an element with a return record");
    Work<Real> w;
    w.lo = parse_real<Real>(e.lo, e.lo_exact);
    w.hi = parse_real<Real>(e.hi, e.hi_exact);
    w.meta = e;
    w.next_time = e.history.back().n + e.history.back().p + 1;
    seeds.push_back(std::move(w));
  } else {
    for (const Interval& piece : input.pieces) {
      if (!(piece.hi > piece.lo)) continue;
      Work<Real> w;
      w.lo = Real(piece.lo);
      w.hi = Real(piece.hi);
      w.next_time = 1;
      seeds.push_back(std::move(w));
    }
  }

  auto task = [&](std::size_t i) {
    std::optional<PrecisionScope> scope;
    if constexpr (!std::is_same_v<Real, double>) scope.emplace(cfg.precision_bits);
    EngineResult out;
    Engine<Real> engine(cfg, input.mode, input.horizon, i);
    Work<Real> seed = seeds[i];
    if constexpr (!std::is_same_v<Real, double>) {
      seed.lo = parse_real<Real>(to_d(seeds[i].lo), exact_string(seeds[i].lo));
      seed.hi = parse_real<Real>(to_d(seeds[i].hi), exact_string(seeds[i].hi));
    }
    engine.process(std::move(seed), out);
    out.adjoined = engine.adjoined();
    return out;
  };

  std::vector<EngineResult> parts;
  {
    std::optional<PrecisionScope> scope;
    if constexpr (!std::is_same_v<Real, double>) scope.emplace(cfg.precision_bits);
    parts = parallel_map(seeds.size(), cfg.workers, task);
  }

  EngineResult all;
  bool any_fit = false;
  for (EngineResult& p : parts) {
    all.finished.insert(all.finished.end(), p.finished.begin(), p.finished.end());
    all.exclusions.insert(all.exclusions.end(), p.exclusions.begin(), p.exclusions.end());
    all.splits.insert(all.splits.end(), p.splits.begin(), p.splits.end());
    all.log.insert(all.log.end(), p.log.begin(), p.log.end());
    all.returns.insert(all.returns.end(), p.returns.begin(), p.returns.end());
    if (p.fit_samples > 0) {
      all.C1 = any_fit ? std::min(all.C1, p.C1) : p.C1;
      all.C7 = any_fit ? std::min(all.C7, p.C7) : p.C7;
      any_fit = true;
    }
    all.fit_samples += p.fit_samples;
    all.K_startup = std::max(all.K_startup, p.K_startup);
    all.max_split_error = std::max(all.max_split_error, p.max_split_error);
    all.adjoined += p.adjoined;
  }
  return all;
}

template <class Real>
SurvivorAudit audit_typed(const InductionConfig& cfg, const ParamElement& element, int n,
                          const FittedConstants& fitted) {
  using std::log;
  SurvivorAudit audit;
  InductionChecklist& ck = audit.checklist;
  ck.n = n;
  audit.min_return_derivative = std::numeric_limits<double>::infinity();
  if (element.n0 < 0 || n < element.n0) return audit;
  ck.applicable = true;
  for (int i = 0; i < 6; ++i) ck.worst_margin[i] = std::numeric_limits<double>::infinity();

  const Real b = Real(cfg.b);
  const Real lo = parse_real<Real>(element.lo, element.lo_exact);
  const Real hi = parse_real<Real>(element.hi, element.hi_exact);
  std::vector<int> returns;
  for (const ReturnRecord& r : element.history) {
    if (r.n <= n) returns.push_back(r.n);
  }
  const bool n_is_return = std::find(returns.begin(), returns.end(), n) != returns.end();
  const double log_c1 = fitted.C1 > 0 ? std::log(fitted.C1) : 0.0;
  const double log_c7 = fitted.C7 > 0 ? std::log(fitted.C7) : 0.0;
  const double log_cd = fitted.C_delta > 0 ? std::log(fitted.C_delta) : 0.0;

  const int samples = std::max(2, cfg.sample_density);
  for (int s = 0; s < samples; ++s) {
    const Real a = s == 0 ? lo : (s == samples - 1 ? hi : Real(lo + (hi - lo) * Real(s) / Real(samples - 1)));
    std::vector<double> log_d(static_cast<std::size_t>(n) + 1, 0.0);  // log (f^nu)'(f(c))
    std::vector<double> log_dist(static_cast<std::size_t>(n) + 1, 0.0);
    Lift<Real> p;
    p.frac = Real(kCritical);
    log_dist[0] = -std::numeric_limits<double>::infinity();
    for (int nu = 1; nu <= n; ++nu) {
      p = advance_lift(p, a, b);
      const Real d = math::deriv(p.frac, b);
      log_d[static_cast<std::size_t>(nu)] =
          log_d[static_cast<std::size_t>(nu - 1)] + (d > 0 ? to_d(Real(log(d))) : -std::numeric_limits<double>::infinity());
      const Real dist = circle_dist_c(p.frac);
      log_dist[static_cast<std::size_t>(nu)] =
          dist > 0 ? to_d(Real(log(dist))) : -std::numeric_limits<double>::infinity();
    }
    auto upd = [&](int item, double margin) { ck.worst_margin[item] = std::min(ck.worst_margin[item], margin); };
    if (n >= 1) upd(0, log_d[static_cast<std::size_t>(n - 1)] - 2.0 * std::pow(n - 1, 2.0 / 3.0));
    for (int nu = element.n0; nu < n; ++nu) upd(1, log_d[static_cast<std::size_t>(nu)] - std::pow(nu, 2.0 / 3.0));
    for (int nu = 1; nu < n; ++nu) upd(2, log_d[static_cast<std::size_t>(nu)] - log_c1 - std::pow(nu, 2.0 / 3.0));
    if (n_is_return) {
      for (int nu : returns) {
        if (nu >= n || nu < 1) continue;
        const double lr = log_d[static_cast<std::size_t>(n - 1)] - log_d[static_cast<std::size_t>(nu - 1)];
        audit.min_return_derivative = std::min(audit.min_return_derivative, std::exp(lr));
        upd(3, lr - log_cd);
      }
    }
    for (int nu = element.n0; nu <= n; ++nu) {
      upd(4, log_dist[static_cast<std::size_t>(nu)] + std::sqrt(static_cast<double>(nu)));
    }
    for (int nu = 1; nu <= n; ++nu) {
      upd(5, log_dist[static_cast<std::size_t>(nu)] + std::sqrt(static_cast<double>(nu)) - log_c7);
    }
    if (s == 0 || s == samples - 1) {
      for (int nu : returns) {
        if (log_dist[static_cast<std::size_t>(nu)] + std::sqrt(static_cast<double>(nu)) < 0.0) audit.endpoints_ba = false;
      }
    }
  }
  for (int i = 0; i < 6; ++i) {
    if (ck.worst_margin[i] == std::numeric_limits<double>::infinity()) ck.worst_margin[i] = 0.0;  // vacuous
    ck.pass[i] = ck.worst_margin[i] >= 0.0;
  }
  if (n >= 1) {
    // Distortion quotient between the two endpoints at k = n - 1.
    double lr = 0.0;
    Real x = math::wrap(math::lift(Real(kCritical), lo, b));
    Real y = math::wrap(math::lift(Real(kCritical), hi, b));
    for (int j = 1; j <= n - 1; ++j) {
      lr += to_d(Real(log(math::deriv(x, b)))) - to_d(Real(log(math::deriv(y, b))));
      x = math::wrap(math::lift(x, lo, b));
      y = math::wrap(math::lift(y, hi, b));
    }
    audit.global_distortion = std::exp(std::abs(lr));
  }
  return audit;
}

}  // namespace

EngineResult run_engine(const InductionConfig& cfg, const EngineInput& input) {
  if (cfg.precision_bits == 0) return run_typed<double>(cfg, input);
  return run_typed<HighReal>(cfg, input);
}

SurvivorAudit audit_element(const InductionConfig& cfg, const ParamElement& element, int n,
                            const FittedConstants& fitted) {
  if (cfg.precision_bits == 0) return audit_typed<double>(cfg, element, n, fitted);
  PrecisionScope scope(cfg.precision_bits);
  return audit_typed<HighReal>(cfg, element, n, fitted);
}

}  // namespace dsm::detail
