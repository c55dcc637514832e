#pragma once

namespace dsm {

// Closed real interval [lo, hi]; also used for parameter ranges.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const noexcept { return hi - lo; }
  double mid() const noexcept { return lo + 0.5 * (hi - lo); }
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

}  // namespace dsm
