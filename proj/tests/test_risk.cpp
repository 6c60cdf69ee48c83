#include "oracle.hpp"
#include "qrisk/classify.hpp"
#include "qrisk/risk.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace qrisk;

namespace {

Distribution emp(std::vector<double> v) { return Distribution::empirical(v); }

double value(const ExtendedRisk& r) {
  REQUIRE(r.is_finite());
  return r.value;
}

} // namespace

TEST_CASE("three representations on [1,2,3,4]") {
  auto x = emp({1, 2, 3, 4});
  CHECK(value(rho_quantile(x, Distortion::expectation())) == 2.5);
  CHECK(value(rho_quantile(x, Distortion::value_at_risk(0.5))) == 2);
  CHECK(value(rho_quantile(x, Distortion::expected_shortfall(0.5))) == 3.5);
  CHECK(value(rho_choquet(x, Distortion::expected_shortfall(0.5))) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(value(rho_mixture(x, Distortion::expected_shortfall(0.5))) == doctest::Approx(3.5).epsilon(1e-15));
  CHECK(value(rho_choquet(emp({-1, 1}), Distortion::expectation())) == 0);
  for (auto d : {Distortion::value_at_risk(0.3), Distortion::threshold(0.4), Distortion::sqrt_example()})
    CHECK(value(rho_choquet(Distribution::point_mass(-4.5), d)) == doctest::Approx(-4.5).epsilon(1e-15));
  CHECK_THROWS_AS(rho_mixture(x, Distortion::value_at_risk(0.5)), NotSpectralError);
}

TEST_CASE("discrete risk matches the brute-force Stieltjes sum") {
  std::vector<oracle::Law> laws = {
      oracle::empirical({1, 2, 3, 4}),
      oracle::empirical({-2, -2, 0, 1, 1, 1, 4, 9}),
      {{-3, 0.2}, {-1, 0.1}, {0, 0.3}, {2, 0.25}, {5, 0.15}},
      {{-7.5, 0.125}, {-2, 0.375}, {0.5, 0.5}},
  };
  struct Pair {
    Distortion d;
    oracle::Dfun f;
  };
  std::vector<Pair> ds = {
      {Distortion::expectation(), oracle::identity()},
      {Distortion::value_at_risk(0.5), oracle::var(0.5)},
      {Distortion::value_at_risk(0.9), oracle::var(0.9)},
      {Distortion::expected_shortfall(0.25), oracle::es(0.25)},
      {Distortion::expected_shortfall_order(3, 0.25), oracle::es_n(3, 0.25)},
      {Distortion::threshold(0.5), oracle::threshold(0.5)},
      {Distortion::sqrt_example(), oracle::sqrt_example()},
  };
  for (auto& law : laws) {
    std::vector<Atom> atoms;
    for (auto [v, p] : law) atoms.push_back({v, p});
    auto x = Distribution::discrete(atoms);
    for (auto& p : ds) {
      double expect = oracle::rho(law, p.f);
      CHECK(value(rho_quantile(x, p.d)) == doctest::Approx(expect).epsilon(1e-13));
      CHECK(value(rho_choquet(x, p.d)) == doctest::Approx(expect).epsilon(1e-13));
    }
  }
}

TEST_CASE("value at risk") {
  CHECK(value_at_risk(emp({1, 2, 3, 4}), 0.5) == 2);
  CHECK(value_at_risk(Distribution::pareto_negative(1.0), 0.25) == doctest::Approx(-2).epsilon(1e-15));
  auto x = Distribution::discrete({{-3, 0.2}, {-1, 0.1}, {0, 0.3}, {2, 0.25}, {5, 0.15}});
  for (double a : {0.1, 0.2, 0.25, 0.6, 0.85, 0.99})
    CHECK(value_at_risk(x, a) == value(rho_quantile(x, Distortion::value_at_risk(a))));
}

TEST_CASE("expected shortfall closed form and infimum") {
  auto x = emp({1, 2, 3, 4});
  CHECK(value(expected_shortfall(x, 0.5)) == 3.5);
  CHECK(value(expected_shortfall(x, 0)) == 2.5);
  CHECK(value(expected_shortfall(x, 0.75)) == 4);

  auto inf = expected_shortfall_infimum(x, 0.5);
  CHECK(inf.value == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(inf.minimizer >= 2 - 1e-9);
  CHECK(inf.minimizer <= 3 + 1e-9);
  CHECK(expected_shortfall_infimum(Distribution::point_mass(7), 0.3).value == doctest::Approx(7).epsilon(1e-12));
  CHECK(expected_shortfall_infimum(emp({0, 10}), 0.9).value == doctest::Approx(10).epsilon(1e-12));
  CHECK(oracle::es_grid_min(oracle::empirical({0, 10}), 0.9) == doctest::Approx(10));

  auto law = oracle::empirical({-2, -2, 0, 1, 1, 1, 4, 9});
  auto y = emp({-2, -2, 0, 1, 1, 1, 4, 9});
  for (double a : {0.1, 0.3, 0.5, 0.8, 0.95}) {
    double expect = oracle::es_grid_min(law, a);
    CHECK(value(expected_shortfall(y, a)) == doctest::Approx(expect).epsilon(1e-13));
    CHECK(expected_shortfall_infimum(y, a).value == doctest::Approx(expect).epsilon(1e-10));
    CHECK(value(rho_quantile(y, Distortion::expected_shortfall(a))) == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("expected shortfall of order n") {
  auto x = emp({1, 2, 3, 4});
  CHECK(value(expected_shortfall_order_n(x, 1, 0.5)) == 3.5);
  CHECK(value(expected_shortfall_order_n(emp({0, 1}), 2, 0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(value(rho_mixture(emp({0, 1}), Distortion::expected_shortfall_order(2, 0))) ==
        doctest::Approx(0.75).epsilon(1e-12));
  double prev = 0;
  for (int n : {1, 2, 5, 20, 100, 400}) {
    double v = value(expected_shortfall_order_n(x, n, 0));
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev > 3.99);
}

TEST_CASE("negative Pareto closed forms") {
  auto x = Distribution::pareto_negative(1.0);
  auto close = [](const ExtendedRisk& r, double expect) {
    REQUIRE(r.is_finite());
    CHECK(r.value == doctest::Approx(expect).epsilon(1e-9));
  };
  // q(u) = -u^(-1/2)
  close(mean(x), -2);
  for (double a : {0.1, 0.25, 0.5, 0.9}) {
    double es = -2 / (1 + std::sqrt(a));
    close(expected_shortfall(x, a), es);
    close(rho_quantile(x, Distortion::expected_shortfall(a)), es);
    close(rho_choquet(x, Distortion::expected_shortfall(a)), es);
    close(rho_mixture(x, Distortion::expected_shortfall(a)), es);
  }
  close(rho_quantile(x, Distortion::expected_shortfall_order(2, 0)), -4.0 / 3);
  close(rho_choquet(x, Distortion::expected_shortfall_order(2, 0)), -4.0 / 3);
  for (double d : {0.1, 0.5}) {
    double expect = -2 * std::sqrt(d) - (1 - d) / std::sqrt(d);
    close(rho_quantile(x, Distortion::threshold(d)), expect);
    close(rho_choquet(x, Distortion::threshold(d)), expect);
  }
  CHECK(rho_quantile(x, Distortion::sqrt_example()).kind == RiskKind::NegInfinity);
  CHECK(rho_choquet(x, Distortion::sqrt_example()).kind == RiskKind::NegInfinity);
}

TEST_CASE("outside the domain") {
  auto heavy = Distribution::pareto_positive(1.0, 1.0);
  CHECK(rho_quantile(heavy, Distortion::expectation()).kind == RiskKind::NotInDomain);
  CHECK(rho_choquet(heavy, Distortion::expected_shortfall(0.5)).kind == RiskKind::NotInDomain);
  CHECK(expected_shortfall(heavy, 0.3).kind == RiskKind::NotInDomain);
  CHECK(value(rho_quantile(heavy, Distortion::value_at_risk(0.5))) == doctest::Approx(2).epsilon(1e-14));
  auto light = Distribution::pareto_positive(3.0, 1.0);
  CHECK(value(mean(light)) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("domain comparison") {
  auto r = compare_domains(Distortion::expected_shortfall(0.5), Distortion::expectation(), 0.01);
  CHECK(r.first_below_second);
  // both are L^1 here, which takes precedence over the plain inclusion
  CHECK(r.relation == DomainRelation::EqualToExpectationDomain);
  auto s = compare_domains(Distortion::sqrt_example(), Distortion::expectation(), 0.25);
  CHECK(s.first_sandwich.has_value());
  CHECK_FALSE(compare_domains(Distortion::sqrt_example(), Distortion::expectation(), 0.01).first_sandwich);
  auto v = compare_domains(Distortion::value_at_risk(0.3), Distortion::value_at_risk(0.6), 0.6);
  CHECK(v.second_below_first);
}

TEST_CASE("membership classes") {
  auto p1 = Distribution::pareto_negative(1.0);
  auto sq = Distortion::sqrt_example();
  for (auto m : {ClassifyMethod::Analytic, ClassifyMethod::Probe}) {
    CHECK(classify(p1, sq, DomainClass::LQ, m).verdict == Verdict::Member);
    CHECK(classify(p1, sq, DomainClass::Pichler, m).verdict == Verdict::Member);
    CHECK(classify(p1, sq, DomainClass::Acerbi, m).verdict == Verdict::NonMember);
  }
  auto tail1 = Distribution::pareto_negative(1.0, 1.0);
  auto th = Distortion::threshold(0.5);
  for (auto m : {ClassifyMethod::Analytic, ClassifyMethod::Probe}) {
    CHECK(classify(tail1, th, DomainClass::LQ, m).verdict == Verdict::Member);
    CHECK(classify(tail1, th, DomainClass::Pichler, m).verdict == Verdict::Member);
    CHECK(classify(tail1, th, DomainClass::Acerbi, m).verdict == Verdict::NonMember);
  }
  auto probe = classify(p1, sq, DomainClass::Acerbi, ClassifyMethod::Probe);
  CHECK(probe.partial_integrals.size() == 40);
  for (auto c : {DomainClass::LQ, DomainClass::Acerbi, DomainClass::Pichler})
    CHECK(classify(emp({-1e6, 3, 1e9}), Distortion::expectation(), c).verdict == Verdict::Member);
}
