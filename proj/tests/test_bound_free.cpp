#include <cmath>

#include "doctest.h"
#include "dsm/bound_free.hpp"
#include "dsm/errors.hpp"
#include "oracles.hpp"

namespace {

const dsm::MtParameter& fixture_mt() {
  static const dsm::MtParameter mt = dsm::find_mt(2, 1, {0.5, 1.0}).accepted.at(0);
  return mt;
}

}  // namespace

TEST_SUITE("bound_free") {
  TEST_CASE("beta bound period matches its definition") {
    const dsm::MtParameter& mt = fixture_mt();
    const dsm::MapParams p(mt.a0, 1.0);
    const double beta = 0.05;
    const double x = 0.5 + 0.9 * std::exp(-8.0);
    const dsm::BoundPeriodResult r = dsm::beta_bound_period(p, x, beta);
    REQUIRE_FALSE(r.capped);
    oracle::Big y = x, c = 0.5;
    for (int j = 1; j <= r.p + 1; ++j) {
      y = oracle::f_mod(y, oracle::Big(mt.a0), oracle::Big(1.0));
      c = oracle::f_mod(c, oracle::Big(mt.a0), oracle::Big(1.0));
      const double gap = dsm::circle_dist(y.convert_to<double>(), c.convert_to<double>());
      if (j <= r.p) {
        CHECK(gap <= std::exp(-beta * j) * (1 + 1e-6));
      } else {
        CHECK(gap > std::exp(-beta * j) * (1 - 1e-6));
        CHECK(r.exit_gap == doctest::Approx(gap).epsilon(1e-2));
      }
    }
    CHECK_THROWS_AS(dsm::beta_bound_period(p, 0.5, beta), dsm::Error);
  }

  TEST_CASE("far points escape immediately") {
    const dsm::MapParams p(fixture_mt().a0, 1.0);
    CHECK(dsm::beta_bound_period(p, 0.9, 1.0).p <= 1);
  }

  TEST_CASE("bound period law at high precision") {
    const dsm::MtParameter& mt = fixture_mt();
    const auto law = dsm::audit_bound_period_law(mt, 0.0052, {60.0, 100.0}, 1100);
    REQUIRE(law.size() == 4);
    for (const auto& s : law) {
      CHECK_FALSE(s.violated);
      CHECK(s.p < s.bound);
      CHECK(s.bound == doctest::Approx(4 * s.r / mt.kappa_tilde).epsilon(1e-12));
    }
  }

  TEST_CASE("parameter bound period of a degenerate interval is the cap") {
    const dsm::ParamBoundResult r = dsm::param_bound_period({0.3, 0.3}, 0.9, 0, 0.3, dsm::ReturnWindow(3));
    CHECK(r.capped);
    CHECK(r.p == dsm::kBoundPeriodCap);
    CHECK_THROWS_AS(dsm::param_bound_period({0.4, 0.3}, 0.9, 0, 0.35, dsm::ReturnWindow(3)), dsm::Error);
  }

  TEST_CASE("outside expansion at small b") {
    const auto grid = dsm::uniform_grid(1000);
    const dsm::ReturnWindow w(3);
    const auto e = dsm::outside_expansion_stats(dsm::MapParams(0.3, 0.4), w.window(), grid, 50);
    CHECK(e.kappa1_hat >= std::log(1.2));
    const auto z = dsm::outside_expansion_stats(dsm::MapParams(0.3, 0.0), {0.5, 0.5}, grid, 50);
    CHECK(z.kappa1_hat == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(z.censored_fraction == 1.0);
  }

  TEST_CASE("hitting-time derivatives near the fixture stay above dbar/2") {
    const dsm::MtParameter& mt = fixture_mt();
    const dsm::ReturnWindow w(8, 4);
    const auto e = dsm::outside_expansion_stats(dsm::MapParams(mt.a0, 1.0),
                                                {0.5 - w.delta1(), 0.5 + w.delta1()}, dsm::uniform_grid(2000), 60);
    CHECK(e.c2_hat > 0.0);
    REQUIRE(e.min_hit_deriv.has_value());
    CHECK(*e.min_hit_deriv > mt.d_bar / 2);
  }

  TEST_CASE("bound distortion") {
    const dsm::MtParameter& mt = fixture_mt();
    const double x = 0.5 + 0.9 * std::exp(-8.0);
    const dsm::BoundPeriodResult r = dsm::beta_bound_period(dsm::MapParams(mt.a0, 1.0), x, 1.0);
    CHECK(dsm::bound_distortion_ratio(mt, x, 0, 1.0) == 1.0);
    CHECK(dsm::bound_distortion_ratio(mt, x, r.p, 1.0) < 2.0);
    CHECK_THROWS_AS(dsm::bound_distortion_ratio(mt, x, r.p + 5, 1.0), dsm::Error);
  }

  TEST_CASE("global distortion") {
    CHECK(dsm::global_distortion_ratio(0.3, 0.3, 0.9, 12) == 1.0);
    for (int k : {1, 10, 40}) CHECK(dsm::global_distortion_ratio(0.1, 0.7, 0.0, k) == 1.0);
    CHECK(dsm::global_distortion_ratio(0.2, 0.2001, 0.9, 8) >= 1.0);
  }

  TEST_CASE("recovery report") {
    const dsm::MtParameter& mt = fixture_mt();
    const dsm::MapParams p(mt.a0, 1.0);
    const double beta = 0.0052;
    const double x = 0.5 + 0.9 * std::exp(-8.0);
    const dsm::BoundPeriodResult r = dsm::beta_bound_period(p, x, beta);
    const dsm::RecoveryReport rep = dsm::recovery_check(p, x, r, beta, mt.kappa_tilde);
    CHECK(rep.r == 8);
    CHECK(rep.exit_consistent);
    CHECK(rep.log_ratio_sqrt > 0.0);
    CHECK(r.exit_gap > std::exp(-4 * std::sqrt(r.p + 1.0)));
  }

  TEST_CASE("default beta is small and positive") {
    const double beta = dsm::default_beta(fixture_mt(), dsm::ReturnWindow(8, 4));
    CHECK(beta > 0.0);
    CHECK(beta <= fixture_mt().kappa_tilde / 100);
  }
}
