#include <cmath>
#include <random>

#include "doctest.h"
#include "dsm/errors.hpp"
#include "dsm/partition.hpp"

using dsm::PartitionIndex;
using dsm::ReturnWindow;

TEST_SUITE("partition") {
  TEST_CASE("window radii") {
    const ReturnWindow w(3, 1);
    CHECK(w.delta() == std::exp(-3.0));
    CHECK(w.delta1() == std::exp(-1.0));
    CHECK(w.in_window(0.5 + 0.9 * std::exp(-3.0)));
    CHECK_FALSE(w.in_window(0.5 + std::exp(-3.0)));
    CHECK_THROWS_AS(ReturnWindow(0), dsm::Error);
    CHECK_THROWS_AS(ReturnWindow(3, 3), dsm::Error);
    CHECK_THROWS_AS(ReturnWindow(3).delta1(), dsm::Error);
  }

  TEST_CASE("interval_of examples") {
    const ReturnWindow w(3);
    const dsm::Interval i50 = dsm::interval_of(w, {5, 0});
    CHECK(i50.lo == doctest::Approx(0.5 + std::exp(-6.0)).epsilon(1e-15));
    CHECK(i50.width() == doctest::Approx(std::exp(-5.0) * (1 - std::exp(-1.0)) / 25).epsilon(1e-12));
    const dsm::Interval edge = dsm::interval_of(w, {3, 8});
    CHECK(edge.hi == doctest::Approx(0.5 + w.delta()).epsilon(1e-15));
    const dsm::Interval m50 = dsm::interval_of(w, {-5, 0});
    CHECK(m50.hi == doctest::Approx(0.5 - std::exp(-6.0)).epsilon(1e-15));
    CHECK(m50.width() == doctest::Approx(i50.width()).epsilon(1e-12));
    CHECK_THROWS_AS(dsm::interval_of(w, {2, 0}), dsm::Error);
    CHECK_THROWS_AS(dsm::interval_of(w, {5, 25}), dsm::Error);
  }

  TEST_CASE("annulus sums") {
    for (int r = 3; r <= 40; ++r) {
      double sum = 0.0;
      for (int l = 0; l < r * r; ++l) sum += dsm::cell_length(r);
      const double expect = std::exp(-r) * (1 - std::exp(-1.0));
      CHECK(std::abs(sum - expect) <= 1e-12 * expect);
      CHECK(dsm::annulus_length(r) == doctest::Approx(expect).epsilon(1e-14));
    }
  }

  TEST_CASE("deep cells keep relative precision as offsets") {
    const ReturnWindow w(3);
    for (int r : {20, 40}) {
      double sum = 0.0;
      for (int l = 0; l < r * r; ++l) {
        const dsm::Interval o = dsm::offsets_of(w, {-r, l});
        CHECK(o.lo > 0.0);
        sum += o.width();
      }
      CHECK(sum == doctest::Approx(dsm::annulus_length(r)).epsilon(1e-13));
    }
    CHECK(dsm::offsets_of(w, {3, 8}).hi == w.delta());
  }

  TEST_CASE("locate examples") {
    const ReturnWindow w(3);
    const auto idx = dsm::locate(w, 0.5 + 0.9 * std::exp(-5.0));
    REQUIRE(idx.has_value());
    CHECK(*idx == PartitionIndex{5, 21});
    CHECK_FALSE(dsm::locate(w, 0.5).has_value());
    CHECK_FALSE(dsm::locate(w, 0.5 + 2 * w.delta()).has_value());
    const auto left = dsm::locate(w, 0.5 - 0.9 * std::exp(-5.0));
    REQUIRE(left.has_value());
    CHECK(*left == PartitionIndex{-5, 21});
  }

  TEST_CASE("locate and interval_of round trip") {
    const ReturnWindow w(3);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int failures = 0;
    for (int i = 0; i < 10000; ++i) {
      const double x = 0.5 + u(rng) * w.delta();
      const auto idx = dsm::locate(w, x);
      if (!idx) {
        ++failures;
        continue;
      }
      const dsm::Interval j = dsm::interval_of(w, *idx);
      if (!(j.lo <= x && x <= j.hi)) ++failures;
    }
    CHECK(failures == 0);
  }

  TEST_CASE("outward and inward neighbours") {
    const ReturnWindow w(3);
    CHECK(dsm::outward(w, {5, 3}) == PartitionIndex{5, 4});
    CHECK(dsm::outward(w, {5, 24}) == PartitionIndex{4, 0});
    CHECK_FALSE(dsm::outward(w, {3, 8}).has_value());
    CHECK(dsm::inward({4, 0}) == PartitionIndex{5, 24});
    CHECK(dsm::inward({-4, 2}) == PartitionIndex{-4, 1});
  }

  TEST_CASE("extended intervals") {
    const ReturnWindow w(3);
    const dsm::ExtendedInterval e = dsm::extended(w, {5, 3});
    CHECK(e.interval.width() == doctest::Approx(3 * std::exp(-5.0) * (1 - std::exp(-1.0)) / 25).epsilon(1e-12));
    CHECK_FALSE(e.truncated);
    const dsm::ExtendedInterval x = dsm::extended(w, {5, 24});
    CHECK(x.interval.hi == doctest::Approx(dsm::interval_of(w, {4, 0}).hi).epsilon(1e-15));
    const dsm::ExtendedInterval t = dsm::extended(w, {3, 8});
    CHECK(t.truncated);
    CHECK(t.interval.hi == doctest::Approx(0.5 + w.delta()).epsilon(1e-15));
    const dsm::ExtendedInterval l = dsm::extended(w, {-3, 8});
    CHECK(l.truncated);
    CHECK(l.interval.lo == doctest::Approx(0.5 - w.delta()).epsilon(1e-15));
  }
}
