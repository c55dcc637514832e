#pragma once

// Return window I* = (c - delta, c + delta), delta = e^{-r_delta}, and its
// subdivision into cells I_{r,l}: I_r is the annulus at distance
// [e^{-|r|-1}, e^{-|r|}) from c on the side sign(r), cut into r^2 equal cells
// with l increasing away from c.

#include <cstdint>
#include <optional>

#include "dsm/interval.hpp"
#include "dsm/map.hpp"

namespace dsm {

struct PartitionIndex {
  int r = 0;
  int ell = 0;

  friend bool operator==(const PartitionIndex&, const PartitionIndex&) = default;
};

class ReturnWindow {
 public:
  explicit ReturnWindow(int r_delta, std::optional<int> r_delta1 = std::nullopt);

  int r_delta() const noexcept { return r_delta_; }
  double delta() const noexcept { return delta_; }
  std::optional<int> r_delta1() const noexcept { return r_delta1_; }
  // delta_1 = e^{-r_delta1}; throws InvalidArgument when I** is not configured.
  double delta1() const;

  Interval window() const noexcept { return {kCritical - delta_, kCritical + delta_}; }
  bool in_window(double x) const noexcept;

 private:
  int r_delta_;
  double delta_;
  std::optional<int> r_delta1_;
};

// Length of each cell I_{r,l}: e^{-|r|-1}(e - 1)/r^2.
double cell_length(int r);
// |I_r| = e^{-|r|}(1 - e^{-1}).
double annulus_length(int r);

Interval interval_of(const ReturnWindow& w, PartitionIndex idx);
// Distances from c of the cell's near (lo) and far (hi) edges. Unlike
// interval_of this keeps full relative precision for deep cells, whose
// absolute endpoints are not resolved next to c = 1/2.
Interval offsets_of(const ReturnWindow& w, PartitionIndex idx);
std::optional<PartitionIndex> locate(const ReturnWindow& w, double x);
inline std::optional<PartitionIndex> locate(const ReturnWindow& w, CirclePoint x) {
  return locate(w, x.value());
}

// Next cell away from c (l+1, wrapping to I_{r-1,0} on reaching l = r^2) and
// next cell toward c (l-1, wrapping to I_{r+1,(r+1)^2-1}).
std::optional<PartitionIndex> outward(const ReturnWindow& w, PartitionIndex idx);
PartitionIndex inward(PartitionIndex idx);

struct ExtendedInterval {
  Interval interval;
  bool truncated = false;
};

// I^+_{r,l} = I_{r,l-1} u I_{r,l} u I_{r,l+1} with the cross-annulus
// convention; truncated at the window edge c +- delta.
ExtendedInterval extended(const ReturnWindow& w, PartitionIndex idx);

}  // namespace dsm
