#include <cmath>

#include "doctest.h"
#include "dsm/errors.hpp"
#include "dsm/mt_finder.hpp"
#include "oracles.hpp"

TEST_SUITE("mt_finder") {
  TEST_CASE("fixed points") {
    const dsm::PeriodicSearch s0 = dsm::periodic_points(0.0, 1);
    bool found = false;
    for (const auto& pt : s0.points) {
      if (dsm::circle_dist(pt.x, 0.0) < 1e-12) {
        found = true;
        CHECK(pt.multiplier == doctest::Approx(4.0).epsilon(1e-10));
      }
    }
    CHECK(found);
    const dsm::PeriodicSearch s5 = dsm::periodic_points(0.5, 1);
    found = false;
    for (const auto& pt : s5.points) {
      if (std::abs(pt.x - 0.5) < 1e-6) {
        found = true;
        CHECK(std::abs(pt.multiplier) < 1e-6);
      }
    }
    CHECK(found);
  }

  TEST_CASE("period two residuals") {
    const dsm::PeriodicSearch s = dsm::periodic_points(0.3, 2, {1.0, 1e-12, 0});
    CHECK_FALSE(s.points.empty());
    for (const auto& pt : s.points) {
      oracle::Big y = pt.x;
      for (int j = 0; j < 2; ++j) y = oracle::f_mod(y, oracle::Big(0.3), oracle::Big(1.0));
      CHECK(dsm::circle_dist(y.convert_to<double>(), pt.x) < 1e-11);
    }
  }

  TEST_CASE("find_mt rejects the critical fixed point") {
    const dsm::MtSearch s = dsm::find_mt(1, 1, {0.0, 1.0});
    CHECK(s.accepted.empty());
    bool saw_half = false;
    for (const auto& c : s.rejected) saw_half = saw_half || std::abs(c.a - 0.5) < 1e-9;
    CHECK(saw_half);
  }

  TEST_CASE("find_mt includes a = 0 only with closed endpoints") {
    dsm::MtOptions o;
    o.include_endpoints = true;
    const dsm::MtSearch s = dsm::find_mt(1, 1, {0.0, 1.0}, o);
    REQUIRE(s.accepted.size() == 1);
    CHECK(s.accepted[0].a0 == 0.0);
    CHECK(s.accepted[0].multiplier == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("find_mt (2,1) on (0.5,1)") {
    const dsm::MtSearch s = dsm::find_mt(2, 1, {0.5, 1.0});
    REQUIRE_FALSE(s.accepted.empty());
    for (const auto& mt : s.accepted) {
      CHECK(std::abs(mt.multiplier) > 1.0);
      CHECK(mt.verified_high);
      const std::vector<oracle::Big> xs = oracle::critical_orbit(mt.a0, 1.0, 3);
      CHECK(dsm::circle_dist(xs[3].convert_to<double>(), xs[2].convert_to<double>()) < 1e-10);
      CHECK(mt.d_bar > 0.0);
      const dsm::CriticalGap g1 = dsm::critical_gap(mt, mt.m + mt.ell);
      const dsm::CriticalGap g10 = dsm::critical_gap(mt, 10 * (mt.m + mt.ell));
      CHECK(g1.value > 0.0);
      CHECK(std::abs(g1.value - g10.value) < 1e-9);
      CHECK_FALSE(g1.provisional);
    }
  }

  TEST_CASE("find_mt is symmetric under a -> 1 - a") {
    const dsm::MtSearch s = dsm::find_mt(2, 1, {0.0, 1.0});
    REQUIRE(s.accepted.size() == 2);
    CHECK(s.accepted[0].a0 + s.accepted[1].a0 == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("critical gap edge cases") {
    CHECK(dsm::critical_gap(0.5, 5).value == 0.0);
    CHECK(dsm::critical_gap(0.5, 5).argmin == 1);
    const dsm::CriticalGap g = dsm::critical_gap(0.79255917698540723, 1, 3);
    CHECK(g.provisional);
  }

  TEST_CASE("high precision refinement stays close") {
    const dsm::MtSearch s = dsm::find_mt(2, 1, {0.5, 1.0});
    REQUIRE_FALSE(s.accepted.empty());
    dsm::PrecisionScope scope(256);
    const dsm::HighReal a = dsm::refine_mt_high(s.accepted[0], 256);
    CHECK(std::abs(a.convert_to<double>() - s.accepted[0].a0) < 1e-13);
  }
}
