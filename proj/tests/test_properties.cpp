#include "oracle.hpp"
#include "qrisk/properties.hpp"

#include <doctest.h>

#include <cmath>

using namespace qrisk;

TEST_CASE("counterexample for VaR at one half") {
  auto r = build_counterexample(Distortion::value_at_risk(0.5), 1.0);
  CHECK(r.witness.u == 0.5);
  CHECK(r.witness.eps == 0.25);
  CHECK(r.rho_x == doctest::Approx(-1.25).epsilon(1e-15));
  CHECK(r.rho_y == doctest::Approx(-1.125).epsilon(1e-15));
  CHECK(r.rho_sum == doctest::Approx(-1.25).epsilon(1e-15));
  CHECK(r.gap == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(r.sum_matches_table);
  CHECK(r.rho_sum > r.rho_x + r.rho_y);
}

TEST_CASE("counterexample gaps follow the closed form") {
  std::vector<std::pair<Distortion, oracle::Dfun>> ds = {
      {Distortion::value_at_risk(0.2), oracle::var(0.2)},
      {Distortion::value_at_risk(0.9), oracle::var(0.9)},
      {Distortion::threshold(0.5), oracle::threshold(0.5)},
      {Distortion::threshold(0.1), oracle::threshold(0.1)},
      {Distortion::sqrt_example(), oracle::sqrt_example()},
  };
  for (auto& [d, f] : ds)
    for (double a : {1.0, 10.0}) {
      auto r = build_counterexample(d, a);
      double u = r.witness.u, e = r.witness.eps;
      double expect = (a + e / 2) * (2 * f(u) - f(u - e) - f(u + e));
      CHECK(r.gap > 0);
      CHECK(std::fabs(r.gap - expect) <= 1e-10);
      CHECK(r.sum_matches_table);

      // risks of the marginals recomputed from the joint table cells
      oracle::Law lx, ly, ls;
      for (auto& c : r.table.cells()) {
        lx.push_back({c.x, c.probability});
        ly.push_back({c.y, c.probability});
        ls.push_back({c.x + c.y, c.probability});
      }
      CHECK(r.rho_x == doctest::Approx(oracle::rho(lx, f)).epsilon(1e-13));
      CHECK(r.rho_y == doctest::Approx(oracle::rho(ly, f)).epsilon(1e-13));
      CHECK(r.rho_sum == doctest::Approx(oracle::rho(ls, f)).epsilon(1e-13));
    }
}

TEST_CASE("no counterexample for convex distortions") {
  CHECK_THROWS_AS(build_counterexample(Distortion::expected_shortfall(0.3)), NoCounterexampleError);
  CHECK_THROWS_AS(build_counterexample(Distortion::expectation()), NoCounterexampleError);
}

TEST_CASE("joint tables") {
  auto t = JointTable::from_cells({{1, 10, 0.25}, {1, 20, 0.25}, {2, 10, 0.5}, {3, 0, 0.0}});
  CHECK(t.cells().size() == 3);
  CHECK(t.first().cdf(1) == 0.5);
  CHECK(t.second().cdf(10) == 0.75);
  CHECK(t.sum().cdf(11) == 0.25);
  CHECK(t.sum().cdf(12) == 0.75);
  CHECK_THROWS(JointTable::from_cells({{1, 1, 0.5}, {2, 2, 0.4}}));
}

TEST_CASE("subadditivity search") {
  auto es = subadditivity_search(Distortion::expected_shortfall(0.5), {2000, 3, 1e-9, {}});
  CHECK(es.violations == 0);
  CHECK(es.trials == 2000);

  auto e = subadditivity_search(Distortion::expectation(), {500, 1, 1e-9, {}});
  CHECK(e.violations == 0);
  CHECK(e.max_abs_gap <= 1e-10);

  auto cex = build_counterexample(Distortion::value_at_risk(0.5));
  auto v = subadditivity_search(Distortion::value_at_risk(0.5), {200, 1, 1e-9, {cex.table}});
  CHECK(v.violations > 0);
  REQUIRE(v.worst);
  CHECK(v.worst->gap >= 1.125 - 1e-12);

  auto a = subadditivity_search(Distortion::value_at_risk(0.5), {300, 11, 1e-9, {}});
  auto b = subadditivity_search(Distortion::value_at_risk(0.5), {300, 11, 1e-9, {}});
  CHECK(a.violations == b.violations);
  CHECK(a.max_gap == b.max_gap);
}

TEST_CASE("random tables are reproducible and bounded") {
  for (std::uint64_t i = 0; i < 50; ++i) {
    auto t = random_joint_table(42, i);
    auto u = random_joint_table(42, i);
    REQUIRE(t.cells().size() == u.cells().size());
    for (std::size_t k = 0; k < t.cells().size(); ++k) {
      CHECK(t.cells()[k].x == u.cells()[k].x);
      CHECK(t.cells()[k].probability == u.cells()[k].probability);
      CHECK(std::fabs(t.cells()[k].x) <= 10);
      CHECK(std::fabs(t.cells()[k].y) <= 10);
    }
    CHECK(t.first().atoms().size() <= 8);
    CHECK(t.second().atoms().size() <= 8);
  }
}

TEST_CASE("comonotone additivity") {
  auto x1 = Distribution::empirical(std::vector<double>{1, 2});
  auto x2 = Distribution::empirical(std::vector<double>{10, 20});
  auto c = comonotone_additivity_check(Distortion::expected_shortfall(0.5), x1, x2);
  CHECK(c.passed);
  CHECK(c.rho_sum.value == 22);
  CHECK(c.rho_first.value + c.rho_second.value == 22);

  auto y1 = Distribution::empirical(std::vector<double>{-3, 0, 4, 4, 8});
  auto y2 = Distribution::empirical(std::vector<double>{2, -1, 5, 0, 7});
  auto v = comonotone_additivity_check(Distortion::value_at_risk(0.3), y1, y2);
  CHECK(v.passed);
  CHECK(v.difference == 0);

  auto p = comonotone_additivity_check(Distortion::threshold(0.4), y1, Distribution::point_mass(3));
  CHECK(p.passed);
}
