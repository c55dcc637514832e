#pragma once

// Uniform-expansion certificates by interval propagation, and the
// parameter-plane classifier built on top of them.

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "dsm/interval.hpp"
#include "dsm/map.hpp"

namespace dsm {

struct ExpansionCertificate {
  MapParams params;
  int N = 0;
  double lambda = 0.0;  // rigorous lower bound of (f^N)' over the circle
  std::size_t cells = 0;
  double max_cell_width = 0.0;
  std::string method = "interval-propagation";
};

struct Refutation {
  MapParams params;
  int N = 0;
  double witness = 0.0;
  double upper_bound = 0.0;  // rigorous upper bound of (f^N)' on the witness cell
  double recomputed = 0.0;   // (f^N)'(witness) in 106-bit arithmetic
};

struct Inconclusive {
  MapParams params;
  int N = 0;
  int depth = 0;
  std::size_t cells = 0;
  double best_lower = 0.0;  // min lower bound over cells left undecided
};

using CertifyResult = std::variant<ExpansionCertificate, Refutation, Inconclusive>;

struct CertifyOptions {
  int max_depth = 20;
  std::size_t max_cells = std::size_t{1} << 20;  // cells per subdivision level
};

// Breadth-first bisection of [0,1); a cell is certified when the product of
// per-step lower bounds of f' along its outward-rounded images reaches
// lambda_target, refuted when the product of upper bounds is below 1.
// Throws InvalidArgument for N < 1 or lambda_target <= 1.
CertifyResult certify_uniform(const MapParams& p, int N, double lambda_target, const CertifyOptions& opts = {});

// Rigorous bounds of f' on a lift interval of width at most 1/2.
Interval derivative_bounds(const MapParams& p, Interval j);

enum class CellClass { Tongue, Neutral, ExpandingCandidate, CertifiedExpanding, Undecided };
std::string to_string(CellClass c);

struct PlaneDiagnostics {
  int iterations = 0;
  int max_N_tried = 0;
  double best_lambda_lower = 0.0;
  double recurrence_dist = 0.0;
  std::string note;
};

struct PlaneCell {
  double a = 0.0;
  double b = 0.0;
  CellClass cls = CellClass::Undecided;
  int period = 0;           // tongue / neutral
  double multiplier = 0.0;  // tongue / neutral
  double lyapunov = 0.0;    // expanding candidate and certified cells
  int cert_N = 0;
  double cert_lambda = 0.0;
  PlaneDiagnostics diag;
};

struct ClassifyOptions {
  int max_iter = 2000;
  int period_cap = 16;
  double tol = 1e-6;  // recurrence distance and neutral band
  std::vector<int> schedule = {1, 2, 4, 8, 16, 32, 64};
  double lambda_target = 1.0 + 1e-9;
  CertifyOptions certify{14, std::size_t{1} << 13};
};

PlaneCell classify_point(double a, double b, const ClassifyOptions& opts = {});

struct Raster {
  Interval a_range;
  Interval b_range;
  int res_a = 0;
  int res_b = 0;
  std::vector<PlaneCell> cells;  // row-major: b outer, a inner, both increasing
};

// Grid nodes include both range endpoints. Throws InvalidArgument for a
// resolution below 2.
Raster scan_plane(Interval a_range, Interval b_range, int res_a, int res_b, const ClassifyOptions& opts = {},
                  int workers = 1);

// CSV body with the fixed header; undecided cells carry the largest N tried
// in cert_N and the best lower bound in cert_lambda.
std::string raster_csv(const Raster& r);
inline constexpr const char* kRasterHeader = "a,b,class,period,multiplier,lyapunov,cert_N,cert_lambda";

struct TongueTip {
  double a = 0.0;
  double b = 0.0;
  int steps = 0;  // bisection steps in b
  double multiplier = 0.0;
};

struct TipOptions {
  int a_grid = 201;
  int refine_iters = 60;
  double b_lo = 0.0;
  double b_hi = 1.0;
};

// Smallest b (to b_tol) at which some a in the window has an attracting
// cycle of exact period `period`. Throws NotFound when b_hi has none and
// InvalidArgument for period < 1 or b_tol <= 0.
TongueTip tongue_tip(int period, Interval a_window, double b_tol, const TipOptions& opts = {});

// Smallest |multiplier| over cycles of exact period q at (a, b); +inf if none.
double min_cycle_multiplier(double a, double b, int q);

}  // namespace dsm
