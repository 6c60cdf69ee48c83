#include "oracle.hpp"
#include "qrisk/distribution.hpp"
#include "qrisk/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace qrisk;

namespace {

Distribution emp(std::vector<double> v) { return Distribution::empirical(v); }

const std::vector<double> kLevels = [] {
  std::vector<double> u;
  for (int k = 1; k < 200; ++k) u.push_back(k / 200.0);
  u.push_back(1e-9);
  u.push_back(1 - 1e-9);
  u.push_back(1.0 / 3);
  u.push_back(2.0 / 3);
  return u;
}();

} // namespace

TEST_CASE("empirical cdf and quantiles") {
  auto x = emp({1, 2, 3, 4});
  CHECK(x.cdf(0.5) == 0.0);
  CHECK(x.cdf(2) == 0.5);
  CHECK(x.cdf(2.5) == 0.5);
  CHECK(x.cdf(4) == 1.0);
  CHECK(x.cdf_left(2) == 0.25);
  CHECK(x.quantile_lower(0.5) == 2);
  CHECK(x.quantile_lower(0.5 + 1e-9) == 3);
  CHECK(x.quantile_upper(0.5) == 3);
  CHECK(x.quantile_upper(0.3) == 2);

  auto y = emp({1, 1, 2});
  CHECK(y.quantile_lower(2.0 / 3) == 1);
  CHECK(y.quantile_upper(2.0 / 3) == 2);
  CHECK(y.atoms().size() == 2);
}

TEST_CASE("quantiles match the brute-force scan") {
  std::vector<std::vector<double>> samples = {
      {5}, {1, 2, 3, 4}, {-2, -2, 0, 1, 1, 1, 4, 9}, {3, -1, 7, 7, 0.5, -6, 2}};
  for (auto& s : samples) {
    auto x = emp(s);
    auto law = oracle::empirical(s);
    for (double u : kLevels) {
      CHECK(x.quantile_lower(u) == oracle::quantile_lower(law, u));
      CHECK(x.quantile_upper(u) == oracle::quantile_upper(law, u));
      CHECK(x.cdf(x.quantile_lower(u)) >= u);
    }
  }
}

TEST_CASE("quantile level outside (0,1) is a domain error") {
  auto x = emp({1, 2});
  CHECK_THROWS_AS(x.quantile_lower(0.0), DomainError);
  CHECK_THROWS_AS(x.quantile_lower(1.0), DomainError);
  CHECK_THROWS_AS(x.quantile_upper(-0.1), DomainError);
  CHECK_THROWS_AS(x.quantile_upper(std::nan("")), DomainError);
}

TEST_CASE("Galois property on a grid") {
  auto x = Distribution::discrete({{-3, 0.2}, {-1, 0.1}, {0, 0.3}, {2, 0.25}, {5, 0.15}});
  for (double u : kLevels)
    for (int k = -40; k <= 60; ++k) {
      double t = k / 8.0;
      CHECK((x.quantile_lower(u) <= t) == (u <= x.cdf(t)));
    }
}

TEST_CASE("discrete atoms at the counterexample levels") {
  auto x = Distribution::discrete({{-1.25, 0.25}, {-0.25, 0.25}, {0.75, 0.25}, {1.75, 0.25}});
  CHECK(x.cdf(-1.25) == 0.5 - 0.25);
  auto z = Distribution::discrete({{-1.25, 0.5}, {1.0, 0.5}});
  CHECK(z.cdf(-1.25) == 0.5);
}

TEST_CASE("invalid discrete input") {
  CHECK_THROWS_AS(Distribution::discrete({{1, 0.5}, {2, 0.4}}), DomainError);
  CHECK_THROWS_AS(Distribution::discrete({{1, -0.5}, {2, 1.5}}), DomainError);
  CHECK_THROWS_AS(Distribution::empirical(std::vector<double>{}), DomainError);
  CHECK_THROWS_AS(Distribution::point_mass(INFINITY), DomainError);
}

TEST_CASE("transforms") {
  CHECK(emp({1, 2}).shifted(3).quantile_lower(0.7) == 5);
  auto pos = emp({-2, 5}).positive_part();
  CHECK(pos.quantile_lower(0.9) == 5);
  CHECK(pos.quantile_lower(0.3) == 0);
  auto zero = emp({-2, 5, 8}).scaled(0);
  for (double u : kLevels) CHECK(zero.quantile_lower(u) == 0);
  CHECK_THROWS_AS(emp({1, 2}).scaled(-1), UnsupportedError);

  auto x = Distribution::discrete({{-3, 0.2}, {-1, 0.1}, {0, 0.3}, {2, 0.25}, {5, 0.15}});
  for (double u : kLevels) {
    double q = x.quantile_lower(u);
    CHECK(x.scaled(2.5).shifted(-1).quantile_lower(u) == doctest::Approx(2.5 * q - 1).epsilon(1e-15));
    CHECK(x.shifted(-0.4).scaled(2.5).quantile_lower(u) == doctest::Approx(2.5 * (q - 0.4)).epsilon(1e-15));
    CHECK(x.positive_part().quantile_lower(u) == std::max(q, 0.0));
  }
}

TEST_CASE("absolute value cdf against brute force") {
  auto law = oracle::Law{{-3, 0.2}, {-1, 0.1}, {0, 0.3}, {1, 0.1}, {2, 0.15}, {5, 0.15}};
  std::vector<Atom> atoms;
  oracle::Law abs_law;
  for (auto [v, p] : law) {
    atoms.push_back({v, p});
    abs_law.push_back({std::fabs(v), p});
  }
  auto x = Distribution::discrete(atoms);
  auto a = x.absolute();
  for (int k = 0; k <= 48; ++k) {
    double t = k / 8.0;
    CHECK(a.cdf(t) == doctest::Approx(oracle::cdf(abs_law, t)).epsilon(1e-14));
    CHECK(a.cdf(t) == doctest::Approx(x.cdf(t) - x.cdf_left(-t)).epsilon(1e-14));
  }
}

TEST_CASE("comonotone sums") {
  auto s = comonotone_sum(emp({1, 2}), emp({10, 20}));
  REQUIRE(s.atoms().size() == 2);
  CHECK(s.atoms()[0].value == 11);
  CHECK(s.atoms()[1].value == 22);
  CHECK(s.atoms()[0].probability == 0.5);

  auto t = comonotone_sum(emp({1, 2, 3}), emp({0, 0, 9}));
  REQUIRE(t.atoms().size() == 3);
  CHECK(t.atoms()[0].value == 1);
  CHECK(t.atoms()[1].value == 2);
  CHECK(t.atoms()[2].value == 12);

  auto x = emp({-2, -2, 0, 1, 1, 1, 4, 9});
  auto c = comonotone_sum(x, Distribution::point_mass(2.5));
  auto sh = x.shifted(2.5);
  for (double u : kLevels) CHECK(c.quantile_lower(u) == sh.quantile_lower(u));
}

TEST_CASE("negative Pareto") {
  auto x = Distribution::pareto_negative(1.0);
  CHECK(x.quantile_lower(0.25) == doctest::Approx(-2).epsilon(1e-15));
  CHECK(x.cdf(-2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(x.cdf(-1) == 1.0);
  for (double u : kLevels) {
    CHECK(x.quantile_lower(u) == doctest::Approx(-1 / std::sqrt(u)).epsilon(1e-14));
    CHECK(x.quantile_upper(u) == x.quantile_lower(u));
  }
  auto y = Distribution::pareto_negative(2.0, 1.0);
  CHECK(y.quantile_lower(0.5) == doctest::Approx(-4).epsilon(1e-15));
  CHECK_THROWS_AS(Distribution::pareto_negative(-1.0), DomainError);
}

TEST_CASE("positive Pareto and its tail") {
  auto x = Distribution::pareto_positive(3.0, 1.0);
  for (double u : kLevels) CHECK(x.quantile_lower(u) == doctest::Approx(std::pow(1 - u, -1.0 / 3)).epsilon(1e-13));
  CHECK(x.quantile_lower_tail(1e-30) == doctest::Approx(1e10).epsilon(1e-13));
  CHECK(x.survival(1e10) == doctest::Approx(1e-30).epsilon(1e-13));
}
