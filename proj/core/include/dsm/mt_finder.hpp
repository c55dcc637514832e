#pragma once

// MT parameters at b = 1: critical orbit preperiodic onto
// a repelling cycle. Also a general periodic-point solver used by the
// certifier for b < 1.

#include <string>
#include <vector>

#include "dsm/interval.hpp"
#include "dsm/map.hpp"

namespace dsm {

struct PeriodicPoint {
  double x = 0.0;
  double multiplier = 0.0;  // (f^q)'(x)
};

struct BracketFailure {
  double lo = 0.0;
  double hi = 0.0;
  long long k = 0;
  std::string reason;
};

struct PeriodicSearch {
  std::vector<PeriodicPoint> points;  // sorted by x
  std::vector<BracketFailure> failures;
};

struct PeriodicOptions {
  double b = 1.0;
  double refine_tol = 1e-12;
  int grid = 0;  // 0: 64 * 2^q points, at least 4096
};

// All x in [0,1) with f^q(x) = x (mod 1). Roots are bracketed as sign
// changes of F^q(x) - x - k, so tangential (even-multiplicity) roots can be
// missed; every bracket that fails to converge is listed in failures.
PeriodicSearch periodic_points(double a, int q, const PeriodicOptions& opts = {});

struct MtParameter {
  double a0 = 0.0;
  int m = 0;
  int ell = 0;
  double periodic_point = 0.0;
  double multiplier = 0.0;
  double kappa_tilde = 0.0;
  double d_bar = 0.0;
  long long winding = 0;    // F^ell(y) - y = winding at y = xi_m(a0)
  double residual = 0.0;    // circle_dist(xi_{m+ell}, xi_m)
  bool verified_high = false;
};

enum class MtRejection { Degenerate, CriticalHit, NonMinimalPeriod, NonMinimalPreperiod, Residual };
std::string to_string(MtRejection r);

struct MtCandidate {
  double a = 0.0;
  double multiplier = 0.0;
  double min_crit_dist = 0.0;
  MtRejection reason = MtRejection::Degenerate;
};

struct MtOptions {
  double tol_rep = 1e-3;
  double tol_crit = 1e-6;
  double tol = 1e-13;          // bisection width on a
  int grid_per_unit = 10000;
  bool include_endpoints = false;  // a_range is open unless set
  unsigned verify_bits = 106;      // 2x double mantissa
  int d_bar_horizon = 0;           // 0: 10(m + ell)
};

struct MtSearch {
  std::vector<MtParameter> accepted;  // sorted by a0
  std::vector<MtCandidate> rejected;
};

MtSearch find_mt(int m, int ell, Interval a_range, const MtOptions& opts = {});

struct CriticalGap {
  double value = 0.0;
  int argmin = 0;
  bool provisional = false;
};

// min_{1<=j<=J} circle_dist(c, xi_j(a0)) at b = 1; provisional when J is
// below settle (normally m + ell).
CriticalGap critical_gap(double a0, int J, int settle = 0);
CriticalGap critical_gap(const MtParameter& mt, int J);

// a0 to `bits` of precision by bisection on the lift equation.
HighReal refine_mt_high(const MtParameter& mt, unsigned bits);

}  // namespace dsm
