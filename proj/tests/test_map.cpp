#include <cmath>
#include <random>

#include "doctest.h"
#include "dsm/errors.hpp"
#include "dsm/map.hpp"
#include "oracles.hpp"

using dsm::MapParams;

TEST_SUITE("map_core") {
  TEST_CASE("params validate their ranges") {
    CHECK_NOTHROW(MapParams(0.0, 1.0));
    CHECK_THROWS_AS(MapParams(1.0, 0.5), dsm::Error);
    CHECK_THROWS_AS(MapParams(-0.1, 0.5), dsm::Error);
    CHECK_THROWS_AS(MapParams(0.2, 1.01), dsm::Error);
  }

  TEST_CASE("eval examples") {
    CHECK(dsm::eval(MapParams(0.3, 0.8), dsm::CirclePoint(0.5)).value() == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(dsm::eval(MapParams(0.0, 0.0), dsm::CirclePoint(0.25)).value() == 0.5);
    const double ref = oracle::f_mod(oracle::Big(0.2), oracle::Big(0.1), oracle::Big(0.7)).convert_to<double>();
    CHECK(std::abs(dsm::eval(MapParams(0.1, 0.7), dsm::CirclePoint(0.2)).value() - ref) < 1e-15);
  }

  TEST_CASE("circle points are normalized") {
    CHECK(dsm::CirclePoint(1.25).value() == 0.25);
    CHECK(dsm::CirclePoint(-0.25).value() == 0.75);
  }

  TEST_CASE("lift has degree two") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const MapParams p(u(rng), u(rng));
      const double x = u(rng);
      CHECK(std::abs(dsm::lift(p, x + 1.0) - dsm::lift(p, x) - 2.0) < 1e-13);
    }
  }

  TEST_CASE("derivative examples and bounds") {
    CHECK(dsm::deriv(MapParams(0.2, 1.0), 0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(dsm::deriv(MapParams(0.2, 0.6), 0.5) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(dsm::deriv(MapParams(0.2, 1.0), 0.0) == 4.0);
    const MapParams p(0.3, 1.0);
    double max_d = 0.0, max_d2 = 0.0;
    const int grid = 1000000;
    for (int i = 0; i < grid; ++i) {
      const double x = static_cast<double>(i) / grid;
      max_d = std::max(max_d, dsm::deriv(p, x));
      max_d2 = std::max(max_d2, std::abs(dsm::deriv2(p, x)));
    }
    CHECK(max_d <= 4.0 + 1e-12);
    CHECK(max_d2 <= 4.0 * M_PI + 1e-9);
  }

  TEST_CASE("circle distance") {
    CHECK(dsm::circle_dist(0.1, 0.9) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(dsm::circle_dist(0.37, 0.37) == 0.0);
    CHECK(dsm::circle_dist(0.25, 0.75) == 0.5);
  }

  TEST_CASE("critical orbit trace invariants") {
    const dsm::OrbitTrace t = dsm::iterate_critical(MapParams(0.25, 1.0), 2);
    CHECK(t.points[0] == 0.5);
    CHECK(t.space_derivs[0] == 1.0);
    CHECK(t.param_derivs[0] == 0.0);
    CHECK(t.param_derivs[1] == 1.0);
    CHECK(t.param_derivs[2] == doctest::Approx(3.0).epsilon(1e-14));
    const dsm::OrbitTrace s = dsm::iterate_critical(MapParams(0.37, 0.95), 12);
    for (int k = 0; k < 12; ++k) {
      CHECK(s.space_derivs[k + 1] == doctest::Approx(s.space_derivs[k] * dsm::deriv(MapParams(0.37, 0.95), s.points[k + 1])));
    }
  }

  TEST_CASE("parameter derivative matches the closed form") {
    const dsm::OrbitTrace t = dsm::iterate_critical(MapParams(0.37, 0.95), 25);
    const double closed = oracle::param_derivative_closed(0.37, 0.95, 25);
    CHECK(std::abs(t.param_derivs[25] - closed) <= 1e-8 * std::abs(closed));
  }

  TEST_CASE("transversality: recurrence, closed form and finite differences agree") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 20; ++s) {
      const double a = u(rng), b = u(rng);
      const dsm::OrbitTrace t = dsm::iterate_critical(MapParams(a, b), 30);
      for (int n : {1, 5, 17, 30}) {
        const double rec = t.param_derivs[static_cast<std::size_t>(n)];
        const double closed = oracle::param_derivative_closed(a, b, n);
        const double fd = oracle::param_derivative_fd(a, b, n, 1e-7 / std::max(1.0, closed));
        CHECK(std::abs(rec - closed) <= 1e-5 * closed);
        CHECK(std::abs(fd - closed) <= 1e-5 * closed);
        CHECK(rec >= 1.0);
      }
    }
  }

  TEST_CASE("comparability ratio") {
    CHECK(dsm::comparability_ratio(MapParams(0.3, 0.7), 1) == 1.0);
    CHECK(dsm::comparability_ratio(MapParams(0.3, 0.0), 10) == doctest::Approx(1023.0 / 512.0).epsilon(1e-15));
    const MapParams p(0.2074408230145928, 1.0);
    const dsm::OrbitTrace t = dsm::iterate_critical(p, 40);
    const double r = dsm::comparability_ratio(p, 40);
    CHECK(r == doctest::Approx(dsm::comparability_sum(t, 40)).epsilon(1e-9));
    CHECK(r >= 1.0);
  }

  TEST_CASE("comparability ratio flags an exact critical hit") {
    CHECK_THROWS_AS(dsm::comparability_ratio(MapParams(0.5, 1.0), 3), dsm::Error);
  }

  TEST_CASE("lyapunov diagnostics") {
    CHECK(dsm::lyapunov_critical(MapParams(0.3, 0.0), 100, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(dsm::lyapunov_critical(MapParams(0.5, 0.75), 1000, 100) < 0.0);
    CHECK(dsm::lyapunov_critical(MapParams(0.37, 0.45), 100000, 100) >= std::log(1.1));
    CHECK_THROWS_AS(dsm::lyapunov_critical(MapParams(0.5, 1.0), 10, 0), dsm::Error);
  }

  TEST_CASE("log-space and plain products agree") {
    const MapParams p(0.41, 0.999);
    const dsm::OrbitTrace plain = dsm::iterate_critical(p, 60);
    const dsm::OrbitTrace logged = dsm::iterate_critical(p, 60, {true, false});
    for (int k = 0; k <= 60; ++k) {
      CHECK(plain.log_space_derivs[k] == doctest::Approx(logged.log_space_derivs[k]).epsilon(1e-12));
    }
  }

  TEST_CASE("lift points track unreduced orbits") {
    const MapParams p(0.3, 0.9);
    dsm::LiftPoint lp = dsm::LiftPoint::from(0.5);
    oracle::Big x = 0.5;
    for (int j = 0; j < 20; ++j) {
      lp = dsm::advance(lp, p.a, p.b);
      x = oracle::f_lift(x, oracle::Big(p.a), oracle::Big(p.b));
    }
    const oracle::Big frac = x - boost::multiprecision::floor(x);
    CHECK(std::abs(lp.frac - frac.convert_to<double>()) < 1e-6);
  }
}
