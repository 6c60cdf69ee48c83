#include "oracle.hpp"
#include "qrisk/distortion.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace qrisk;

namespace {

std::vector<double> grid(int n) {
  std::vector<double> u;
  for (int k = 0; k <= n; ++k) u.push_back(static_cast<double>(k) / n);
  return u;
}

} // namespace

TEST_CASE("named distortions evaluate like their formulas") {
  struct Case {
    Distortion d;
    oracle::Dfun f;
  };
  std::vector<Case> cases = {
      {Distortion::expectation(), oracle::identity()},
      {Distortion::value_at_risk(0.25), oracle::var(0.25)},
      {Distortion::value_at_risk(0.5), oracle::var(0.5)},
      {Distortion::expected_shortfall(0.5), oracle::es(0.5)},
      {Distortion::expected_shortfall(0.3), oracle::es(0.3)},
      {Distortion::expected_shortfall_order(3, 0.2), oracle::es_n(3, 0.2)},
      {Distortion::threshold(0.5), oracle::threshold(0.5)},
      {Distortion::sqrt_example(), oracle::sqrt_example()},
  };
  for (auto& c : cases)
    for (double u : grid(1000)) CHECK(c.d(u) == doctest::Approx(c.f(u)).epsilon(1e-14));

  CHECK(Distortion::expectation()(0.37) == 0.37);
  CHECK(Distortion::value_at_risk(0.5)(0.5) == 1);
  CHECK(Distortion::value_at_risk(0.25)(0.2) == 0);
  CHECK(Distortion::value_at_risk(0.25)(0.25) == 1);
  CHECK(Distortion::expected_shortfall(0.5)(0.75) == 0.5);
}

TEST_CASE("structural identities of the families") {
  auto es = Distortion::expected_shortfall(0.3);
  auto es1 = Distortion::expected_shortfall_order(1, 0.3);
  for (double u : grid(997)) {
    CHECK(es(u) == es1(u));
    CHECK(Distortion::expected_shortfall(0)(u) == Distortion::expectation()(u));
  }
  CHECK(es.pieces().size() == es1.pieces().size());
}

TEST_CASE("parameters out of range") {
  CHECK_THROWS_AS(Distortion::value_at_risk(0), DomainError);
  CHECK_THROWS_AS(Distortion::value_at_risk(1), DomainError);
  CHECK_THROWS_AS(Distortion::expected_shortfall(1), DomainError);
  CHECK_THROWS_AS(Distortion::expected_shortfall(-0.1), DomainError);
  CHECK_THROWS_AS(Distortion::expected_shortfall_order(0, 0.5), DomainError);
  CHECK_THROWS_AS(Distortion::threshold(0), DomainError);
  CHECK_THROWS_AS(Distortion::threshold(1), DomainError);
}

TEST_CASE("distortion measures") {
  auto v = measure_of(Distortion::value_at_risk(0.4));
  REQUIRE(v.atoms.size() == 1);
  CHECK(v.atoms[0].u == 0.4);
  CHECK(v.atoms[0].mass == 1);
  CHECK(v.density.empty());

  auto e = measure_of(Distortion::expected_shortfall(0.5));
  CHECK(e.atoms.empty());
  REQUIRE(e.density.size() == 1);
  CHECK(e.density[0].lo == 0.5);
  CHECK(e.density[0].term(0.7) == doctest::Approx(2.0));

  auto t = measure_of(Distortion::threshold(0.3));
  REQUIRE(t.atoms.size() == 1);
  CHECK(t.atoms[0].u == 0.3);
  CHECK(t.atoms[0].mass == doctest::Approx(0.7).epsilon(1e-15));
  REQUIRE(t.density.size() == 1);
  CHECK(t.density[0].term(0.1) == 1.0);

  for (auto d : {Distortion::expectation(), Distortion::value_at_risk(0.9), Distortion::expected_shortfall(0.1),
                 Distortion::expected_shortfall_order(5, 0.25), Distortion::threshold(0.7),
                 Distortion::sqrt_example()})
    CHECK(std::fabs(measure_of(d).total_mass() - 1) <= 1e-12);
}

TEST_CASE("convexity verdicts and witnesses") {
  CHECK(is_convex(Distortion::expected_shortfall_order(3, 0.2)).convex);
  CHECK(is_convex(Distortion::expectation()).convex);
  CHECK(is_convex(Distortion::expected_shortfall(0.9)).convex);

  auto v = is_convex(Distortion::value_at_risk(0.5));
  CHECK_FALSE(v.convex);
  REQUIRE(v.witness);
  CHECK(v.witness->u == 0.5);
  CHECK(v.witness->eps == 0.25);

  for (auto d : {Distortion::threshold(0.5), Distortion::threshold(0.1), Distortion::sqrt_example(),
                 Distortion::value_at_risk(0.1)}) {
    auto r = is_convex(d);
    CHECK_FALSE(r.convex);
    REQUIRE(r.witness);
    double u = r.witness->u, eps = r.witness->eps;
    CHECK(2 * d(u) > d(u - eps) + d(u + eps));
  }
}

TEST_CASE("grid test agrees with the structural test on the named families") {
  std::vector<Distortion> ds = {Distortion::expectation(),
                                Distortion::value_at_risk(0.3),
                                Distortion::expected_shortfall(0.25),
                                Distortion::expected_shortfall_order(2, 0.5),
                                Distortion::threshold(0.5),
                                Distortion::sqrt_example()};
  for (auto& d : ds) CHECK(is_convex(d).convex == is_convex_on_grid(d).convex);

  auto opaque = Distortion::opaque([](double u) { return u * u; }, "square");
  CHECK(is_convex(opaque).convex);
  auto bumpy = Distortion::opaque([](double u) { return std::sqrt(u); }, "root");
  CHECK_FALSE(is_convex(bumpy).convex);
}

TEST_CASE("spectral densities") {
  auto s = spectral_of(Distortion::expected_shortfall(0.5));
  CHECK(s(0.25) == 0);
  CHECK(s(0.75) == doctest::Approx(2.0));
  CHECK(s.integral() == doctest::Approx(1.0).epsilon(1e-12));

  auto one = spectral_of(Distortion::expectation());
  for (double u : {0.01, 0.5, 0.99}) CHECK(one(u) == 1);

  auto s3 = spectral_of(Distortion::expected_shortfall_order(3, 0.2));
  for (double u : {0.3, 0.5, 0.9})
    CHECK(s3(u) == doctest::Approx(3 / 0.8 * std::pow((u - 0.2) / 0.8, 2)).epsilon(1e-14));

  try {
    spectral_of(Distortion::value_at_risk(0.5));
    FAIL("expected NotSpectralError");
  } catch (const NotSpectralError& e) {
    CHECK(e.witness().u == 0.5);
  }
}

TEST_CASE("distortion from a spectral density") {
  auto sq = distortion_of(SpectralDensity::from_pieces({{0.0, 1.0, PowerTerm{2.0, 0.0, 1.0, 1.0}}}));
  for (double u : grid(100)) CHECK(sq(u) == doctest::Approx(u * u).epsilon(1e-14));
  auto id = distortion_of(spectral_of(Distortion::expectation()));
  for (double u : grid(100)) CHECK(id(u) == doctest::Approx(u).epsilon(1e-15));
  auto es = Distortion::expected_shortfall(0.75);
  auto back = distortion_of(spectral_of(es));
  for (double u : grid(999)) CHECK(std::fabs(back(u) - es(u)) <= 1e-12);
}

TEST_CASE("mixture measures") {
  auto one = mixture_measure_of(spectral_of(Distortion::expectation()));
  REQUIRE(one.atoms.size() == 1);
  CHECK(one.atoms[0].u == 0);
  CHECK(one.atoms[0].mass == 1);

  auto es = mixture_measure_of(spectral_of(Distortion::expected_shortfall(0.6)));
  REQUIRE(es.atoms.size() == 1);
  CHECK(es.atoms[0].u == 0.6);
  CHECK(es.atoms[0].mass == doctest::Approx(2.5));

  auto lin = mixture_measure_of(SpectralDensity::from_pieces({{0.0, 1.0, PowerTerm{2.0, 0.0, 1.0, 1.0}}}));
  for (auto& a : lin.atoms) CHECK(a.mass == 0);
  for (double u : {0.1, 0.5, 0.9}) CHECK(lin.cumulative(u) == doctest::Approx(2 * u).epsilon(1e-12));

  auto s = spectral_of(Distortion::expected_shortfall_order(3, 0.25));
  auto nu = mixture_measure_of(s);
  for (double u : grid(200))
    if (u > 0 && u < 1) CHECK(std::fabs(nu.cumulative(u) - s(u)) <= 1e-10);
}

TEST_CASE("piecewise validation") {
  CHECK_THROWS(Distortion::piecewise({{0.0, 1.0, 0.0, PowerTerm{0.5, 0.0, 1.0, 1.0}}}));
  CHECK_THROWS(Distortion::piecewise({{0.0, 0.5, 0.0, PowerTerm{-1.0, 0.0, 1.0, 1.0}},
                                      {0.5, 1.0, 0.0, PowerTerm{1.0, 0.0, 1.0, 1.0}}}));
  auto ok = Distortion::piecewise({{0.0, 0.5, 0.0, PowerTerm{0.5, 0.0, 1.0, 1.0}},
                                   {0.5, 1.0, 0.5, PowerTerm{1.0, 0.5, 1.0, 1.0}}});
  CHECK(ok(0.75) == doctest::Approx(0.75));
}
