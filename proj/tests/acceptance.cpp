// Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include "qrisk/classify.hpp"
#include "qrisk/properties.hpp"
#include "qrisk/risk.hpp"
#include "qrisk/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

using namespace qrisk;

namespace {

struct Outcome {
  std::size_t checks = 0;
  std::size_t failures = 0;
  double max_error = 0.0;
  std::string first_failure;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && failures++ == 0) first_failure = what;
  }
  void close(double a, double b, double tol, const std::string& what) {
    double err = std::fabs(a - b);
    if (std::isfinite(err)) max_error = std::max(max_error, err);
    std::ostringstream os;
    os.precision(17);
    os << what << ": " << a << " vs " << b;
    expect(err <= tol, os.str());
  }
};

std::string label(const NamedDistribution& x, const NamedDistortion& d) { return x.name + " / " + d.name; }

bool le(const ExtendedRisk& a, const ExtendedRisk& b, double tol) {
  if (a.kind == RiskKind::NotInDomain || b.kind == RiskKind::NotInDomain) return false;
  if (a.kind == RiskKind::NegInfinity) return true;
  if (b.kind == RiskKind::NegInfinity) return false;
  return a.value <= b.value + tol;
}

const std::vector<double> kLevels = {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99};

struct Matrix {
  std::vector<NamedDistribution> xs;
  std::vector<NamedDistortion> ds;
};

Matrix matrix() {
  auto c = default_suite_config();
  return {c.distributions, c.distortions};
}

Outcome representation(const Matrix& m) {
  Outcome o;
  for (auto& x : m.xs)
    for (auto& d : m.ds) {
      auto q = rho_quantile(x.distribution, d.distortion);
      auto c = rho_choquet(x.distribution, d.distortion);
      o.expect(q.kind == c.kind, label(x, d) + ": quantile and Choquet disagree on finiteness");
      if (q.is_finite() && c.is_finite()) o.close(q.value, c.value, 1e-8, label(x, d) + " quantile vs Choquet");
      if (is_convex(d.distortion).convex) {
        auto mx = rho_mixture(x.distribution, d.distortion);
        o.expect(mx.kind == q.kind, label(x, d) + ": mixture disagrees on finiteness");
        if (q.is_finite() && mx.is_finite()) o.close(q.value, mx.value, 1e-6, label(x, d) + " quantile vs mixture");
      }
    }
  return o;
}

Outcome es_forms(const Matrix& m) {
  Outcome o;
  for (auto& x : m.xs) {
    auto e = mean(x.distribution);
    for (double a : kLevels) {
      auto closed = expected_shortfall(x.distribution, a);
      auto quant = rho_quantile(x.distribution, Distortion::expected_shortfall(a));
      std::string what = x.name + " / es(" + std::to_string(a) + ")";
      o.expect(closed.kind == quant.kind, what + ": closed form and quantile integral disagree on finiteness");
      if (!closed.is_finite() || !quant.is_finite()) continue;
      o.close(closed.value, quant.value, 1e-8, what + " stop-loss vs quantile integral");
      if (a > 0) {
        auto inf = expected_shortfall_infimum(x.distribution, a);
        o.close(inf.value, closed.value, 1e-8, what + " infimum vs stop-loss");
      } else if (x.distribution.is_discrete()) {
        o.expect(closed.value == e.value, what + ": ES_0 differs from the mean");
        o.expect(quant.value == rho_quantile(x.distribution, Distortion::expectation()).value,
                 what + ": es(0) differs from the expectation distortion");
      }
    }
  }
  return o;
}

Outcome axioms(const Matrix& m) {
  Outcome o;
  const double tol = 1e-9;
  auto other = Distribution::empirical(std::vector<double>{4, -1, 0.5, 2, 2, -6, 3, 1});
  for (auto& nx : m.xs) {
    const auto& x = nx.distribution;
    if (!x.is_discrete()) continue;
    for (auto& nd : m.ds) {
      const auto& d = nd.distortion;
      std::string what = label(nx, nd);
      auto r = rho_quantile(x, d);
      o.expect(r.is_finite(), what + ": discrete risk not finite");
      if (!r.is_finite()) continue;
      for (double a : {0.0, 0.5, 1.0, 3.0})
        o.close(rho_quantile(x.scaled(a), d).value, a * r.value, tol, what + " homogeneity a=" + std::to_string(a));
      for (double c : {-5.0, 0.0, 7.0})
        o.close(rho_quantile(x.shifted(c), d).value, r.value + c, tol, what + " translation c=" + std::to_string(c));
      o.expect(r.value <= rho_quantile(x.positive_part(), d).value + tol, what + ": X <= X+ not preserved");
      o.expect(rho_quantile(x.shifted(-1), d).value <= r.value + tol, what + ": X-1 <= X not preserved");
      for (const auto& y : {x.positive_part(), x.scaled(2), other}) {
        auto chk = comonotone_additivity_check(d, x, y, tol);
        o.max_error = std::max(o.max_error, chk.difference);
        o.expect(chk.passed, what + ": comonotone additivity");
      }
    }
  }
  return o;
}

// True when d1 <= d2 on a fine grid and at every knot of either.
bool pointwise_below(const Distortion& d1, const Distortion& d2) {
  std::vector<double> us;
  for (int k = 0; k <= 4096; ++k) us.push_back(k / 4096.0);
  for (const auto* d : {&d1, &d2})
    for (double k : d->knots()) us.push_back(k);
  return std::all_of(us.begin(), us.end(), [&](double u) { return d1(u) <= d2(u) + 1e-15; });
}

Outcome ordering(const Matrix& m) {
  Outcome o;
  for (auto& nx : m.xs) {
    const auto& x = nx.distribution;
    double tol = x.is_discrete() ? 1e-9 : 1e-7 * std::max(1.0, x.scale_hint());
    auto e = mean(x);
    std::vector<ExtendedRisk> r;
    for (auto& nd : m.ds) r.push_back(rho_quantile(x, nd.distortion));
    for (std::size_t i = 0; i < m.ds.size(); ++i) {
      for (std::size_t j = 0; j < m.ds.size(); ++j)
        if (i != j && pointwise_below(m.ds[i].distortion, m.ds[j].distortion))
          o.expect(le(r[j], r[i], tol), nx.name + ": " + m.ds[i].name + " <= " + m.ds[j].name + " but risks not reversed");
      if (is_convex(m.ds[i].distortion).convex && e.is_finite())
        o.expect(le(e, r[i], tol), label(nx, m.ds[i]) + ": below the mean under a convex distortion");
    }
    if (!e.is_finite()) continue;
    double prev = -std::numeric_limits<double>::infinity();
    for (double a : {0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99}) {
      double v = expected_shortfall(x, a).value;
      o.expect(v >= prev - tol, nx.name + ": ES not increasing at alpha=" + std::to_string(a));
      prev = v;
    }
    double lowest = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 60; ++k) lowest = std::min(lowest, expected_shortfall(x, std::ldexp(1.0, -k)).value);
    o.close(lowest, e.value, 1e-6, nx.name + ": dyadic infimum of ES vs mean");
  }
  return o;
}

Outcome subadditivity() {
  Outcome o;
  for (int n : {1, 2, 3, 5})
    for (double a : {0.0, 0.25, 0.5, 0.9}) {
      auto d = Distortion::expected_shortfall_order(n, a);
      auto rep = subadditivity_search(d, {10000, 20240601, 1e-9, {}});
      o.expect(rep.trials == 10000 && rep.violations == 0, d.name() + ": subadditivity violated");
      o.max_error = std::max(o.max_error, std::max(rep.max_gap, 0.0));
    }
  std::vector<Distortion> nonconvex = {Distortion::value_at_risk(0.1), Distortion::value_at_risk(0.25),
                                       Distortion::value_at_risk(0.5), Distortion::value_at_risk(0.75),
                                       Distortion::value_at_risk(0.9), Distortion::threshold(0.1),
                                       Distortion::threshold(0.25), Distortion::threshold(0.5),
                                       Distortion::threshold(0.9), Distortion::sqrt_example()};
  for (auto& d : nonconvex)
    for (double a : {1.0, 10.0}) {
      auto r = build_counterexample(d, a);
      double u = r.witness.u, e = r.witness.eps;
      double identity = (a + e / 2) * (2 * d(u) - d(u - e) - d(u + e));
      o.expect(r.gap > 0, d.name() + ": gap not positive");
      o.close(r.gap, identity, 1e-10, d.name() + ": gap vs identity");
      o.expect(r.sum_matches_table, d.name() + ": sum law differs from the table");
    }
  auto r = build_counterexample(Distortion::value_at_risk(0.5), 1.0);
  o.expect(r.witness.u == 0.5 && r.witness.eps == 0.25, "var(0.5) witness");
  o.close(r.gap, 1.125, 1e-12, "var(0.5) gap");
  o.close(r.rho_sum, -1.25, 1e-12, "var(0.5) rho[X+Y]");
  o.close(r.rho_x + r.rho_y, -2.375, 1e-12, "var(0.5) rho[X]+rho[Y]");
  o.expect(r.rho_sum > r.rho_x + r.rho_y, "var(0.5) not superadditive");
  return o;
}

Outcome spectral() {
  Outcome o;
  std::vector<Distortion> convex = {Distortion::expectation()};
  for (double a : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99}) {
    convex.push_back(Distortion::expected_shortfall(a));
    for (int n : {2, 3, 5}) convex.push_back(Distortion::expected_shortfall_order(n, a));
  }
  for (auto& d : convex) {
    auto back = distortion_of(spectral_of(d));
    for (int k = 0; k < 1000; ++k) {
      double u = k / 999.0;
      o.close(back(u), d(u), 1e-12, d.name() + " round trip at u=" + std::to_string(u));
    }
  }
  for (double a : {0.1, 0.5, 0.9}) {
    bool raised = false;
    try {
      spectral_of(Distortion::value_at_risk(a));
    } catch (const NotSpectralError&) {
      raised = true;
    }
    o.expect(raised, "spectral_of(var) did not raise");
  }
  return o;
}

Outcome domains(const Matrix& m) {
  Outcome o;
  auto is = [&](const Distribution& x, const Distortion& d, DomainClass c, ClassifyMethod meth, Verdict v,
                const std::string& what) { o.expect(classify(x, d, c, meth).verdict == v, what); };
  const auto member = Verdict::Member, non = Verdict::NonMember;
  const auto lq = DomainClass::LQ, acerbi = DomainClass::Acerbi, pichler = DomainClass::Pichler;

  // heavy tails on both sides: E[X^-] and E[X^+] are infinite
  auto two_sided = comonotone_sum(Distribution::pareto_negative(1.0, 1.0), Distribution::pareto_positive(1.0, 1.0));
  for (double a : {0.1, 0.5, 0.9})
    for (auto c : {lq, acerbi, pichler})
      for (auto meth : {ClassifyMethod::Analytic, ClassifyMethod::Probe})
        is(two_sided, Distortion::value_at_risk(a), c, meth, member, "var on two-sided heavy tails");

  auto p1 = Distribution::pareto_negative(1.0);
  auto sq = Distortion::sqrt_example();
  for (auto meth : {ClassifyMethod::Analytic, ClassifyMethod::Probe}) {
    is(p1, sq, lq, meth, member, "sqrt_example LQ");
    is(p1, sq, pichler, meth, member, "sqrt_example Pichler");
    is(p1, sq, acerbi, meth, non, "sqrt_example Acerbi");
  }
  auto probe = classify(p1, sq, acerbi, ClassifyMethod::Probe);
  o.expect(probe.partial_integrals.size() <= 40, "probe used more than 40 levels");

  auto tail1 = Distribution::pareto_negative(1.0, 1.0);
  for (double delta : {0.1, 0.5, 0.9})
    for (auto meth : {ClassifyMethod::Analytic, ClassifyMethod::Probe}) {
      auto th = Distortion::threshold(delta);
      is(tail1, th, lq, meth, member, "threshold LQ");
      is(tail1, th, pichler, meth, member, "threshold Pichler");
      is(tail1, th, acerbi, meth, non, "threshold Acerbi");
    }

  std::vector<Distribution> xs;
  for (auto& x : m.xs) xs.push_back(x.distribution);
  xs.push_back(tail1);
  xs.push_back(two_sided);
  for (auto& x : xs)
    for (auto& nd : m.ds) {
      if (!is_convex(nd.distortion).convex) continue;
      for (auto meth : {ClassifyMethod::Auto, ClassifyMethod::Probe}) {
        auto p = classify(x, nd.distortion, pichler, meth).verdict;
        auto a = classify(x, nd.distortion, acerbi, meth).verdict;
        o.expect(!(p == member && a == non), x.describe() + " / " + nd.name + ": Pichler member outside Acerbi");
      }
    }
  return o;
}

Outcome finiteness(const Matrix& m) {
  Outcome o;
  std::vector<NamedDistribution> xs = m.xs;
  xs.push_back({"pareto-neg-tail-1", Distribution::pareto_negative(1.0, 1.0)});
  xs.push_back({"pareto-neg-tail-0.5", Distribution::pareto_negative(1.0, 0.5)});
  std::vector<NamedDistortion> ds = m.ds;
  for (double a : {0.01, 0.3}) {
    ds.push_back({"var", Distortion::value_at_risk(a)});
    ds.push_back({"es", Distortion::expected_shortfall(a)});
    ds.push_back({"es_n", Distortion::expected_shortfall_order(4, a)});
  }
  std::size_t vanishing = 0;
  for (auto& nd : ds) {
    if (!(nd.distortion.zero_up_to() > 0)) continue;
    ++vanishing;
    for (auto& nx : xs) {
      auto r = rho_quantile(nx.distribution, nd.distortion);
      bool positive_tail = nx.distribution.tails().upper.has_value();
      if (positive_tail && r.kind == RiskKind::NotInDomain) continue;
      o.expect(r.kind == RiskKind::Finite, label(nx, nd) + ": risk is " + to_string(r));
    }
  }
  o.expect(vanishing >= 10, "too few distortions vanish near zero");
  return o;
}

} // namespace

int main() {
  auto m = matrix();
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria = {
      {"representation equivalence", [&] { return representation(m); }},
      {"expected shortfall closed forms", [&] { return es_forms(m); }},
      {"axiom suite", [&] { return axioms(m); }},
      {"ordering suite", [&] { return ordering(m); }},
      {"subadditivity dichotomy", [] { return subadditivity(); }},
      {"spectral round trip", [] { return spectral(); }},
      {"domain separations", [&] { return domains(m); }},
      {"finiteness guard", [&] { return finiteness(m); }},
  };
  std::printf("matrix: %zu distributions x %zu distortions\n", m.xs.size(), m.ds.size());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    bool pass = o.failures == 0 && o.checks > 0;
    failed += !pass;
    std::printf("criterion %zu %s: %s (%zu checks, max error %.3g, %.2fs)\n", i + 1, criteria[i].name,
                pass ? "PASS" : "FAIL", o.checks, o.max_error, secs);
    if (!pass) std::printf("  %zu failures; first: %s\n", o.failures, o.first_failure.c_str());
  }
  return failed ? 1 : 0;
}
