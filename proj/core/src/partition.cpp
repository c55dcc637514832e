#include "dsm/partition.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "dsm/errors.hpp"

namespace dsm {

namespace {

void check_index(const ReturnWindow& w, PartitionIndex idx) {
  const int r = std::abs(idx.r);
  if (r < w.r_delta()) {
    throw Error(ErrorKind::IndexOutOfWindow,
                "|r|=" + std::to_string(r) + " below r_delta=" + std::to_string(w.r_delta()));
  }
  if (idx.ell < 0 || static_cast<long long>(idx.ell) >= static_cast<long long>(r) * r) {
    throw Error(ErrorKind::IndexOutOfWindow,
                "l=" + std::to_string(idx.ell) + " outside [0, r^2) for r=" + std::to_string(r));
  }
}

// Offsets from c of the cell's near and far edges.
struct Offsets {
  double near;
  double far;
};

Offsets offsets(PartitionIndex idx) {
  const int r = std::abs(idx.r);
  const double inner = std::exp(-static_cast<double>(r) - 1.0);
  const double len = cell_length(r);
  const double near = inner + idx.ell * len;
  // The last cell ends exactly at e^{-r} so annuli tile without gaps.
  const double far = (idx.ell + 1 == r * r) ? std::exp(-static_cast<double>(r)) : inner + (idx.ell + 1) * len;
  return {near, far};
}

}  // namespace

ReturnWindow::ReturnWindow(int r_delta, std::optional<int> r_delta1)
    : r_delta_(r_delta), delta_(std::exp(-static_cast<double>(r_delta))), r_delta1_(r_delta1) {
  if (r_delta < 1) throw Error(ErrorKind::InvalidArgument, "r_delta must be >= 1");
  if (r_delta1 && (*r_delta1 >= r_delta || *r_delta1 < 1)) {
    throw Error(ErrorKind::InvalidArgument, "r_delta1 must satisfy 1 <= r_delta1 < r_delta");
  }
}

double ReturnWindow::delta1() const {
  if (!r_delta1_) throw Error(ErrorKind::InvalidArgument, "I** not configured");
  return std::exp(-static_cast<double>(*r_delta1_));
}

bool ReturnWindow::in_window(double x) const noexcept {
  const double d = math::circle_dist(x, kCritical);
  return d > 0.0 && d < delta_;
}

double cell_length(int r) {
  const double ar = std::abs(r);
  return std::exp(-ar - 1.0) * std::expm1(1.0) / (ar * ar);
}

double annulus_length(int r) {
  const double ar = std::abs(r);
  return std::exp(-ar) * -std::expm1(-1.0);
}

Interval interval_of(const ReturnWindow& w, PartitionIndex idx) {
  check_index(w, idx);
  const Offsets o = offsets(idx);
  if (idx.r > 0) return {kCritical + o.near, kCritical + o.far};
  return {kCritical - o.far, kCritical - o.near};
}

Interval offsets_of(const ReturnWindow& w, PartitionIndex idx) {
  check_index(w, idx);
  const Offsets o = offsets(idx);
  return {o.near, o.far};
}

std::optional<PartitionIndex> locate(const ReturnWindow& w, double x) {
  const double xr = math::wrap(x);
  const double s = xr - kCritical;
  const double d = std::abs(s);
  if (d == 0.0 || d >= w.delta()) return std::nullopt;
  const int sign = s > 0 ? 1 : -1;

  // r with e^{-r-1} <= d < e^{-r}; the floor estimate can be off by one
  // near annulus edges, so check neighbours against the exact endpoints.
  int r = static_cast<int>(std::floor(-std::log(d)));
  if (r < w.r_delta()) r = w.r_delta();
  for (int attempt = 0; attempt < 3; ++attempt) {
    if (d < std::exp(-static_cast<double>(r) - 1.0)) {
      ++r;
    } else if (d >= std::exp(-static_cast<double>(r)) && r > w.r_delta()) {
      --r;
    } else {
      break;
    }
  }
  const double inner = std::exp(-static_cast<double>(r) - 1.0);
  const double len = cell_length(r);
  int ell = static_cast<int>(std::floor((d - inner) / len));
  const int cells = r * r;
  if (ell < 0) ell = 0;
  if (ell >= cells) ell = cells - 1;
  // Cells are [near, far) in offset; correct rounding at cell edges.
  for (int attempt = 0; attempt < 3; ++attempt) {
    const Offsets o = offsets({r, ell});
    if (d < o.near && ell > 0) {
      --ell;
    } else if (d >= o.far && ell + 1 < cells) {
      ++ell;
    } else {
      break;
    }
  }
  return PartitionIndex{sign * r, ell};
}

std::optional<PartitionIndex> outward(const ReturnWindow& w, PartitionIndex idx) {
  const int r = std::abs(idx.r);
  const int sign = idx.r > 0 ? 1 : -1;
  if (idx.ell + 1 < r * r) return PartitionIndex{idx.r, idx.ell + 1};
  if (r - 1 < w.r_delta()) return std::nullopt;
  return PartitionIndex{sign * (r - 1), 0};
}

PartitionIndex inward(PartitionIndex idx) {
  const int r = std::abs(idx.r);
  const int sign = idx.r > 0 ? 1 : -1;
  if (idx.ell > 0) return {idx.r, idx.ell - 1};
  return {sign * (r + 1), (r + 1) * (r + 1) - 1};
}

ExtendedInterval extended(const ReturnWindow& w, PartitionIndex idx) {
  check_index(w, idx);
  const Interval mid = interval_of(w, idx);
  const Interval in = interval_of(w, inward(idx));
  const auto out = outward(w, idx);
  ExtendedInterval e;
  if (idx.r > 0) {
    e.interval = {in.lo, out ? interval_of(w, *out).hi : mid.hi};
  } else {
    e.interval = {out ? interval_of(w, *out).lo : mid.lo, in.hi};
  }
  e.truncated = !out.has_value();
  return e;
}

}  // namespace dsm
