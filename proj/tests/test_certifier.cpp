#include <cmath>
#include <random>
#include <sstream>
#include <variant>

#include "doctest.h"
#include "dsm/certifier.hpp"
#include "dsm/errors.hpp"
#include "oracles.hpp"

namespace {

// (f^N)'(x) in long double, written out from the formula.
long double orbit_deriv_ld(double a, double b, double x, int N) {
  const long double pi = 3.141592653589793238462643383279502884L;
  long double y = x, prod = 1;
  for (int j = 0; j < N; ++j) {
    prod *= 2 + 2 * b * std::cos(2 * pi * y);
    y = 2 * y + a + b / pi * std::sin(2 * pi * y);
    y -= std::floor(y);
  }
  return prod;
}

}  // namespace

TEST_SUITE("certifier") {
  TEST_CASE("single-step certificate below b = 1/2") {
    const dsm::CertifyResult r = dsm::certify_uniform(dsm::MapParams(0.3, 0.4), 1, 1.19);
    REQUIRE(std::holds_alternative<dsm::ExpansionCertificate>(r));
    const auto& c = std::get<dsm::ExpansionCertificate>(r);
    CHECK(c.lambda >= 1.19);
    CHECK(c.lambda <= 1.2);
    CHECK(c.lambda == doctest::Approx(1.2).epsilon(1e-12));
  }

  TEST_CASE("doubling map certificate is exact") {
    const dsm::CertifyResult r = dsm::certify_uniform(dsm::MapParams(0.7, 0.0), 1, 1.5);
    REQUIRE(std::holds_alternative<dsm::ExpansionCertificate>(r));
    CHECK(std::get<dsm::ExpansionCertificate>(r).lambda == 2.0);
  }

  TEST_CASE("attracting fixed point is refuted") {
    for (int N : {1, 4, 20}) {
      const dsm::CertifyResult r = dsm::certify_uniform(dsm::MapParams(0.5, 0.75), N, 1.01);
      REQUIRE(std::holds_alternative<dsm::Refutation>(r));
      const auto& ref = std::get<dsm::Refutation>(r);
      CHECK(std::abs(ref.witness - 0.5) < 0.1);
      CHECK(ref.upper_bound < 1.0);
      CHECK(oracle::orbit_derivative(0.5, 0.75, ref.witness, N) < 1.0);
      CHECK(ref.recomputed == doctest::Approx(oracle::orbit_derivative(0.5, 0.75, ref.witness, N)).epsilon(1e-12));
    }
  }

  TEST_CASE("budget exhaustion is inconclusive") {
    const dsm::CertifyResult r = dsm::certify_uniform(dsm::MapParams(0.37, 0.9), 8, 1.01, {2, 16});
    CHECK(std::holds_alternative<dsm::Inconclusive>(r));
  }

  TEST_CASE("argument checks") {
    CHECK_THROWS_AS(dsm::certify_uniform(dsm::MapParams(0.3, 0.4), 0, 1.1), dsm::Error);
    CHECK_THROWS_AS(dsm::certify_uniform(dsm::MapParams(0.3, 0.4), 1, 1.0), dsm::Error);
  }

  TEST_CASE("derivative bounds enclose sampled values") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      const dsm::MapParams p(u(rng), u(rng));
      const double lo = u(rng);
      const double w = 0.5 * u(rng);
      const dsm::Interval bnd = dsm::derivative_bounds(p, {lo, lo + w});
      for (int s = 0; s <= 50; ++s) {
        const double d = dsm::deriv(p, lo + w * s / 50);
        CHECK(bnd.lo <= d);
        CHECK(d <= bnd.hi);
      }
    }
  }

  TEST_CASE("monotone region certifies at N = 1") {
    for (int k = 1; k <= 10; ++k) {
      const double b = k < 10 ? 0.05 * k : 0.49;
      for (double a : {0.0, 0.25, 0.61}) {
        const dsm::CertifyResult r = dsm::certify_uniform(dsm::MapParams(a, b), 1, 2 - 2 * b - 1e-9);
        CHECK(std::holds_alternative<dsm::ExpansionCertificate>(r));
      }
    }
  }

  TEST_CASE("issued certificates survive sampling") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto [a, b, N] : std::vector<std::tuple<double, double, int>>{{0.1, 0.7, 2}, {0.2, 0.6, 2}, {0.3, 0.45, 3}}) {
      const dsm::CertifyResult r = dsm::certify_uniform(dsm::MapParams(a, b), N, 1.0 + 1e-9);
      REQUIRE(std::holds_alternative<dsm::ExpansionCertificate>(r));
      const double lambda = std::get<dsm::ExpansionCertificate>(r).lambda;
      for (int s = 0; s < 10000; ++s) CHECK(orbit_deriv_ld(a, b, u(rng), N) >= lambda);
    }
  }

  TEST_CASE("classify examples") {
    const dsm::PlaneCell t = dsm::classify_point(0.5, 0.75);
    CHECK(t.cls == dsm::CellClass::Tongue);
    CHECK(t.period == 1);
    CHECK(t.multiplier == doctest::Approx(0.5).epsilon(1e-9));
    const dsm::PlaneCell e = dsm::classify_point(0.3, 0.3);
    CHECK(e.cls == dsm::CellClass::CertifiedExpanding);
    CHECK(e.cert_N == 1);
    CHECK(e.cert_lambda >= 1.4 * (1 - 1e-12));
    const dsm::PlaneCell n = dsm::classify_point(0.5, 0.5);
    CHECK(n.cls == dsm::CellClass::Neutral);
    CHECK(std::abs(n.multiplier - 1.0) < 1e-6);
    CHECK(dsm::to_string(dsm::CellClass::ExpandingCandidate) == "expanding_candidate");
  }

  TEST_CASE("scan rows and columns") {
    const dsm::Raster row = dsm::scan_plane({0.0, 0.9}, {0.3, 0.31}, 10, 2);
    for (const dsm::PlaneCell& c : row.cells) {
      if (c.b == 0.3) CHECK(c.cls == dsm::CellClass::CertifiedExpanding);
    }
    const dsm::Raster col = dsm::scan_plane({0.5, 0.6}, {0.55, 0.95}, 2, 9);
    for (const dsm::PlaneCell& c : col.cells) {
      if (c.a != 0.5) continue;
      CHECK(c.cls == dsm::CellClass::Tongue);
      CHECK(c.period == 1);
      CHECK(c.multiplier == doctest::Approx(2 - 2 * c.b).epsilon(1e-8));
    }
    for (const dsm::PlaneCell& c : col.cells) {
      CHECK_FALSE((c.cls == dsm::CellClass::Tongue && c.cert_N > 0 && c.cert_lambda > 1));
    }
    CHECK_THROWS_AS(dsm::scan_plane({0.0, 1.0}, {0.0, 1.0}, 1, 5), dsm::Error);
  }

  TEST_CASE("raster is deterministic and carries diagnostics") {
    const dsm::Raster r1 = dsm::scan_plane({0.1, 0.9}, {0.2, 0.98}, 5, 5, {}, 1);
    const dsm::Raster r3 = dsm::scan_plane({0.1, 0.9}, {0.2, 0.98}, 5, 5, {}, 3);
    const std::string csv = dsm::raster_csv(r1);
    CHECK(csv == dsm::raster_csv(r3));
    CHECK(csv.rfind(std::string(dsm::kRasterHeader) + "\n", 0) == 0);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
      ++rows;
      int commas = 0;
      for (char ch : line) commas += ch == ',';
      CHECK(commas == 7);
      if (line.find(",undecided,") != std::string::npos) CHECK(line.back() != ',');
    }
    CHECK(rows == 25);
    for (const dsm::PlaneCell& c : r1.cells) {
      if (c.cls == dsm::CellClass::Undecided) CHECK(c.diag.iterations > 0);
    }
  }

  TEST_CASE("tongue tip of the fixed-point tongue") {
    const dsm::TongueTip tip = dsm::tongue_tip(1, {0.0, 1.0}, 1e-7);
    CHECK(std::abs(tip.a - 0.5) < 1e-6);
    CHECK(std::abs(tip.b - 0.5) < 1e-6);
    CHECK(tip.b >= 0.5 - 1e-7);
    const dsm::TongueTip off = dsm::tongue_tip(1, {0.42, 0.48}, 1e-6);
    CHECK(off.b > 0.5);
    CHECK_THROWS_AS(dsm::tongue_tip(1, {0.0, 0.3}, 1e-6), dsm::Error);
    CHECK(dsm::tongue_tip(1, {0.0, 1.0}, 0.5).steps <= 1);
    CHECK_THROWS_AS(dsm::tongue_tip(0, {0.0, 1.0}, 1e-3), dsm::Error);
  }

  TEST_CASE("cycle multipliers") {
    CHECK(dsm::min_cycle_multiplier(0.5, 0.75, 1) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(dsm::min_cycle_multiplier(0.3, 0.0, 1) == doctest::Approx(2.0).epsilon(1e-12));
  }
}
