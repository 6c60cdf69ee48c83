#include "qrisk/suite.hpp"

#include "qrisk/classify.hpp"
#include "qrisk/errors.hpp"
#include "qrisk/properties.hpp"
#include "qrisk/risk.hpp"

#include "format.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qrisk {

using detail::format_number;
using detail::json;

const char* to_string(SuiteCheck c) {
  switch (c) {
  case SuiteCheck::Representation: return "representation";
  case SuiteCheck::Axioms: return "axioms";
  case SuiteCheck::Ordering: return "ordering";
  case SuiteCheck::Domain: return "domain";
  case SuiteCheck::Subadditivity: return "subadditivity";
  }
  return "?";
}

const char* to_string(CheckStatus s) {
  switch (s) {
  case CheckStatus::Pass: return "pass";
  case CheckStatus::Fail: return "fail";
  case CheckStatus::ExpectedFailure: return "expected-failure";
  case CheckStatus::Skipped: return "skipped";
  }
  return "?";
}

std::size_t SuiteReport::count(CheckStatus s) const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [s](const CheckResult& r) { return r.status == s; }));
}

SuiteConfig default_suite_config() {
  SuiteConfig c;
  std::vector<double> hundred;
  for (int k = 1; k <= 100; ++k)
    hundred.push_back(((k * 37) % 101 - 50) / 10.0);
  const double one[] = {5.0};
  const double four[] = {1.0, 2.0, 3.0, 4.0};
  const double ties[] = {-2.0, -2.0, 0.0, 1.0, 1.0, 1.0, 4.0, 9.0};
  const auto pareto = Distribution::pareto_negative(1.0);
  c.distributions = {
      {"empirical-1", Distribution::empirical(one)},
      {"empirical-4", Distribution::empirical(four)},
      {"empirical-100", Distribution::empirical(hundred)},
      {"empirical-ties", Distribution::empirical(ties)},
      {"mixed-atoms", Distribution::discrete({{-3.0, 0.2}, {-1.0, 0.1}, {0.0, 0.3}, {2.0, 0.25}, {5.0, 0.15}})},
      {"mixed-atoms-2", Distribution::discrete({{-7.5, 0.125}, {-2.0, 0.375}, {0.5, 0.5}})},
      {"pareto-neg-1", pareto},
      {"pareto-neg-2.5", Distribution::pareto_negative(2.5)},
      {"pareto-neg-1-shift-3", pareto.shifted(3.0)},
      {"pareto-neg-tail-3-scale-2", Distribution::pareto_negative(1.0, 3.0).scaled(2.0)},
      {"pareto-neg-1-negpart", pareto.negative_part()},
      {"pareto-pos-3", Distribution::pareto_positive(3.0, 1.0)},
      {"empirical-4+pareto-neg-1", comonotone_sum(Distribution::empirical(four), pareto)},
  };
  c.distortions = {
      {"expectation", Distortion::expectation()},
      {"var(0.5)", Distortion::value_at_risk(0.5)},
      {"var(0.9)", Distortion::value_at_risk(0.9)},
      {"es(0)", Distortion::expected_shortfall(0.0)},
      {"es(0.5)", Distortion::expected_shortfall(0.5)},
      {"es(0.9)", Distortion::expected_shortfall(0.9)},
      {"es_n(2, 0.5)", Distortion::expected_shortfall_order(2, 0.5)},
      {"es_n(3, 0.25)", Distortion::expected_shortfall_order(3, 0.25)},
      {"threshold(0.5)", Distortion::threshold(0.5)},
      {"threshold(0.1)", Distortion::threshold(0.1)},
      {"sqrt_example", Distortion::sqrt_example()},
  };
  return c;
}

SuiteConfig parse_suite_config(const std::string& text) {
  const auto j = detail::parse_json_text(text);
  if (!j.is_object())
    throw ParseError("suite config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "distributions" && key != "distortions" && key != "checks" && key != "tolerance" &&
        key != "trials" && key != "seed")
      throw ParseError("/" + key + ": unknown key");
  }
  SuiteConfig c;
  auto list = [&](const char* key) -> const json& {
    static const json empty = json::array();
    if (!j.contains(key))
      return empty;
    if (!j.at(key).is_array())
      throw ParseError(std::string("/") + key + ": expected an array");
    return j.at(key);
  };
  std::size_t i = 0;
  for (const auto& e : list("distributions")) {
    const auto path = "/distributions/" + std::to_string(i++);
    if (e.is_object() && e.contains("distribution")) {
      if (e.size() != 2 || !e.contains("name") || !e.at("name").is_string())
        throw ParseError(path + ": expected {\"name\": ..., \"distribution\": ...}");
      c.distributions.push_back(
          {e.at("name").get<std::string>(), detail::distribution_from_json(e.at("distribution"), path + "/distribution")});
    } else {
      auto x = detail::distribution_from_json(e, path);
      c.distributions.push_back({x.describe(), x});
    }
  }
  i = 0;
  for (const auto& e : list("distortions")) {
    const auto path = "/distortions/" + std::to_string(i++);
    if (e.is_object() && e.contains("distortion")) {
      if (e.size() != 2 || !e.contains("name") || !e.at("name").is_string())
        throw ParseError(path + ": expected {\"name\": ..., \"distortion\": ...}");
      c.distortions.push_back(
          {e.at("name").get<std::string>(), detail::distortion_from_json(e.at("distortion"), path + "/distortion")});
    } else {
      auto d = detail::distortion_from_json(e, path);
      c.distortions.push_back({d.name(), d});
    }
  }
  if (c.distributions.empty() || c.distortions.empty())
    throw ParseError("no cases: the matrix needs at least one distribution and one distortion");
  if (j.contains("checks")) {
    c.checks.clear();
    for (const auto& e : list("checks")) {
      const auto name = e.is_string() ? e.get<std::string>() : std::string();
      bool found = false;
      for (auto k : {SuiteCheck::Representation, SuiteCheck::Axioms, SuiteCheck::Ordering, SuiteCheck::Domain,
                     SuiteCheck::Subadditivity})
        if (name == to_string(k)) {
          c.checks.push_back(k);
          found = true;
        }
      if (!found)
        throw ParseError("/checks: unknown check '" + name +
                         "' (representation, axioms, ordering, domain, subadditivity)");
    }
  }
  if (j.contains("tolerance")) {
    if (!j.at("tolerance").is_number() || !(j.at("tolerance").get<double>() > 0.0))
      throw ParseError("/tolerance: expected a positive number");
    c.tolerance = j.at("tolerance").get<double>();
  }
  for (const char* key : {"trials", "seed"})
    if (j.contains(key)) {
      if (!j.at(key).is_number_unsigned())
        throw ParseError(std::string("/") + key + ": expected a non-negative integer");
      (key[0] == 't' ? c.trials : c.seed) = j.at(key).get<std::uint64_t>();
    }
  return c;
}

namespace {

// Collects the sub-assertions of one check into a single result row.
class Tally {
public:
  Tally(SuiteCheck check, std::string x, std::string d) : r_{check, std::move(x), std::move(d), CheckStatus::Pass, 0.0, {}} {}

  void close(const char* what, const ExtendedRisk& a, const ExtendedRisk& b, double tol) {
    if (a.kind != b.kind) {
      fail(std::string(what) + ": " + to_string(a) + " vs " + to_string(b));
      return;
    }
    if (a.is_finite())
      within(what, a.value, b.value, tol);
  }
  void within(const char* what, double a, double b, double tol) {
    const double err = std::fabs(a - b);
    r_.max_error = std::max(r_.max_error, err);
    if (!(err <= tol))
      fail(std::string(what) + ": " + format_number(a) + " vs " + format_number(b));
  }
  void holds(const char* what, bool ok) {
    if (!ok)
      fail(what);
  }
  void fail(const std::string& what) {
    r_.status = CheckStatus::Fail;
    if (!detail_.empty())
      detail_ += "; ";
    detail_ += what;
  }
  void note(const std::string& what) { notes_ += (notes_.empty() ? "" : "; ") + what; }
  void skip(const std::string& why) {
    r_.status = CheckStatus::Skipped;
    notes_ = why;
  }
  void expected_failure(const std::string& why) {
    r_.status = CheckStatus::ExpectedFailure;
    notes_ = why;
  }
  CheckResult finish() {
    r_.detail = r_.status == CheckStatus::Fail ? detail_ : notes_;
    return r_;
  }

private:
  CheckResult r_;
  std::string detail_, notes_;
};

bool convex_named(const Distortion& d) { return !d.is_opaque() && is_convex(d).convex; }

// Sign of D(u) - u on a grid: -1 if D <= id, +1 if D >= id, 0 otherwise.
int against_identity(const Distortion& d) {
  bool below = true, above = true;
  for (int k = 1; k < 1024; ++k) {
    const double u = k / 1024.0, v = d(u);
    below = below && v <= u;
    above = above && v >= u;
  }
  return below ? -1 : above ? 1 : 0;
}

// Absolute tolerance for axiom identities: exact sums are held to 1e-9,
// quadrature-backed values to 1e-7 relative to their size.
double axiom_tol(const Distribution& x, double scale) { return x.is_discrete() ? 1e-9 : 1e-7 * std::max(1.0, scale); }

CheckResult representation(const NamedDistribution& nx, const NamedDistortion& nd, const RiskOptions& o) {
  Tally t(SuiteCheck::Representation, nx.name, nd.name);
  const auto& x = nx.distribution;
  const auto& d = nd.distortion;
  const auto q = rho_quantile(x, d, o);
  t.close("quantile vs Choquet", q, rho_choquet(x, d, o), 1e-8);
  if (convex_named(d))
    t.close("quantile vs mixture", q, rho_mixture(x, d, o), 1e-6);
  if (d.kind() == DistortionKind::ExpectedShortfall) {
    const auto es = expected_shortfall(x, d.alpha(), o);
    t.close("quantile vs stop-loss ES", q, es, 1e-8);
    if (d.alpha() > 0.0 && es.is_finite())
      t.within("quantile vs infimum ES", q.value, expected_shortfall_infimum(x, d.alpha(), {}, o).value, 1e-8);
    if (d.alpha() == 0.0 && x.is_discrete())
      t.holds("ES_0 equals the mean exactly", es.value == mean(x, o).value);
  }
  t.note("rho = " + to_string(q));
  return t.finish();
}

CheckResult axioms(const NamedDistribution& nx, const NamedDistortion& nd, const RiskOptions& o) {
  Tally t(SuiteCheck::Axioms, nx.name, nd.name);
  const auto& x = nx.distribution;
  const auto& d = nd.distortion;
  const auto r = rho_quantile(x, d, o);
  if (!r.is_finite()) {
    t.skip("rho = " + to_string(r));
    return t.finish();
  }
  for (double a : {0.0, 0.5, 1.0, 3.0}) {
    const auto ra = rho_quantile(x.scaled(a), d, o);
    t.close("positive homogeneity", ra, ExtendedRisk::finite(a * r.value), axiom_tol(x, a * std::fabs(r.value)));
  }
  for (double c : {-5.0, 0.0, 7.0}) {
    const auto rc = rho_quantile(x.shifted(c), d, o);
    t.close("translation", rc, ExtendedRisk::finite(r.value + c), axiom_tol(x, std::fabs(r.value) + std::fabs(c)));
  }
  const auto rp = rho_quantile(x.positive_part(), d, o);
  if (rp.is_finite())
    t.holds("monotonicity X <= X+", r.value <= rp.value + axiom_tol(x, std::fabs(rp.value)));
  const auto rm = rho_quantile(x.shifted(-1.0), d, o);
  if (rm.is_finite())
    t.holds("monotonicity X-1 <= X", rm.value <= r.value + axiom_tol(x, std::fabs(r.value)));
  for (const auto& other : {x.positive_part(), x.scaled(2.0)}) {
    const auto c = comonotone_additivity_check(d, x, other, axiom_tol(x, 3.0 * std::fabs(r.value)), o);
    if (c.rho_second.is_finite()) {
      t.holds("comonotone additivity", c.passed);
      t.within("comonotone additivity", c.difference, 0.0, axiom_tol(x, 3.0 * std::fabs(r.value)));
    }
  }
  return t.finish();
}

CheckResult ordering(const NamedDistribution& nx, const NamedDistortion& nd, const RiskOptions& o) {
  Tally t(SuiteCheck::Ordering, nx.name, nd.name);
  const auto& x = nx.distribution;
  const auto& d = nd.distortion;
  const auto r = rho_quantile(x, d, o);
  const auto m = mean(x, o);
  if (!r.is_finite() || !m.is_finite()) {
    t.skip("rho = " + to_string(r) + ", E[X] = " + to_string(m));
    return t.finish();
  }
  const double tol = axiom_tol(x, std::fabs(r.value) + std::fabs(m.value));
  // D <= id gives rho >= E[X] and conversely.
  const int side = against_identity(d);
  if (side < 0)
    t.holds("D <= identity implies E[X] <= rho", m.value <= r.value + tol);
  if (side > 0)
    t.holds("D >= identity implies rho <= E[X]", r.value <= m.value + tol);
  if (convex_named(d))
    t.holds("convex D implies E[X] <= rho", m.value <= r.value + tol);
  double prev = -std::numeric_limits<double>::infinity();
  for (double a : {0.0, 0.25, 0.5, 0.75, 0.9}) {
    const auto es = expected_shortfall(x, a, o);
    if (!es.is_finite())
      break;
    t.holds("ES increasing in alpha", es.value + tol >= prev);
    prev = es.value;
  }
  return t.finish();
}

// Only depends on X: inf over dyadic alpha of ES_alpha is E[X].
CheckResult dyadic_infimum(const NamedDistribution& nx, const RiskOptions& o) {
  Tally t(SuiteCheck::Ordering, nx.name, "");
  const auto& x = nx.distribution;
  const auto m = mean(x, o);
  if (!m.is_finite()) {
    t.skip("E[X] = " + to_string(m));
    return t.finish();
  }
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 60; ++k) {
    const auto es = expected_shortfall(x, std::ldexp(1.0, -k), o);
    if (es.is_finite())
      best = std::min(best, es.value);
  }
  t.within("min over dyadic alpha of ES_alpha vs E[X]", best, m.value, 1e-6);
  t.note("E[X] = " + format_number(m.value) + ", dyadic minimum = " + format_number(best));
  return t.finish();
}

CheckResult domain(const NamedDistribution& nx, const NamedDistortion& nd, const RiskOptions& o) {
  Tally t(SuiteCheck::Domain, nx.name, nd.name);
  const auto& x = nx.distribution;
  const auto& d = nd.distortion;
  const auto lq = classify(x, d, DomainClass::LQ);
  const auto acerbi = classify(x, d, DomainClass::Acerbi);
  const auto pichler = classify(x, d, DomainClass::Pichler);
  const auto r = rho_quantile(x, d, o);
  t.holds("Acerbi member implies LQ member",
          !(acerbi.verdict == Verdict::Member && lq.verdict == Verdict::NonMember));
  if (convex_named(d))
    t.holds("convex D: Pichler member implies Acerbi member",
            !(pichler.verdict == Verdict::Member && acerbi.verdict == Verdict::NonMember));
  if (lq.verdict != Verdict::Inconclusive)
    t.holds("LQ verdict agrees with rho", (lq.verdict == Verdict::Member) == (r.kind != RiskKind::NotInDomain));
  if (d.zero_up_to() > 0.0)
    t.holds("D vanishing near 0 gives rho > -inf", r.kind != RiskKind::NegInfinity);
  t.note(std::string("LQ=") + to_string(lq.verdict) + " Acerbi=" + to_string(acerbi.verdict) +
         " Pichler=" + to_string(pichler.verdict) + " rho=" + to_string(r));
  return t.finish();
}

CheckResult subadditivity(const NamedDistortion& nd, const SuiteConfig& config) {
  Tally t(SuiteCheck::Subadditivity, "", nd.name);
  const auto& d = nd.distortion;
  SearchOptions so;
  so.trials = config.trials;
  so.seed = config.seed;
  if (convex_named(d)) {
    const auto s = subadditivity_search(d, so);
    t.holds("no violation in seeded search", s.violations == 0);
    t.note(std::to_string(s.trials) + " joint tables, max gap " + format_number(s.max_gap));
    return t.finish();
  }
  const auto c = build_counterexample(d);
  t.holds("positive gap", c.gap > 0.0);
  t.within("gap identity", c.gap, c.gap_identity, 1e-10);
  t.holds("sum law matches the table", c.sum_matches_table);
  so.extra_tables = {c.table};
  const auto s = subadditivity_search(d, so);
  t.holds("seeded search finds the violation", s.violations > 0);
  auto r = t.finish();
  if (r.status != CheckStatus::Fail) {
    r.status = CheckStatus::ExpectedFailure;
    r.max_error = std::fabs(c.gap - c.gap_identity);
    r.detail = "non-convex D is not subadditive: witness u=" + format_number(c.witness.u) +
               " eps=" + format_number(c.witness.eps) + ", gap " + format_number(c.gap) + ", " +
               std::to_string(s.violations) + " violation(s) in " + std::to_string(s.trials) + " tables";
  }
  return r;
}

template <class F>
CheckResult guarded(SuiteCheck check, const std::string& x, const std::string& d, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {check, x, d, CheckStatus::Fail, 0.0, std::string("error: ") + e.what()};
  }
}

} // namespace

SuiteReport run_suite(const SuiteConfig& config) {
  if (config.distributions.empty() || config.distortions.empty())
    throw ParseError("no cases: the matrix needs at least one distribution and one distortion");
  if (!(config.tolerance > 0.0))
    throw DomainError("suite tolerance must be positive");
  const RiskOptions o{config.tolerance};
  auto wants = [&](SuiteCheck c) { return std::find(config.checks.begin(), config.checks.end(), c) != config.checks.end(); };
  SuiteReport report;
  auto& out = report.results;
  for (const auto& nx : config.distributions) {
    for (const auto& nd : config.distortions) {
      if (wants(SuiteCheck::Representation))
        out.push_back(guarded(SuiteCheck::Representation, nx.name, nd.name, [&] { return representation(nx, nd, o); }));
      if (wants(SuiteCheck::Axioms))
        out.push_back(guarded(SuiteCheck::Axioms, nx.name, nd.name, [&] { return axioms(nx, nd, o); }));
      if (wants(SuiteCheck::Ordering))
        out.push_back(guarded(SuiteCheck::Ordering, nx.name, nd.name, [&] { return ordering(nx, nd, o); }));
      if (wants(SuiteCheck::Domain))
        out.push_back(guarded(SuiteCheck::Domain, nx.name, nd.name, [&] { return domain(nx, nd, o); }));
    }
    if (wants(SuiteCheck::Ordering))
      out.push_back(guarded(SuiteCheck::Ordering, nx.name, "", [&] { return dyadic_infimum(nx, o); }));
  }
  if (wants(SuiteCheck::Subadditivity))
    for (const auto& nd : config.distortions)
      out.push_back(guarded(SuiteCheck::Subadditivity, "", nd.name, [&] { return subadditivity(nd, config); }));
  return report;
}

namespace detail {

json suite_json(const SuiteReport& r) {
  json results = json::array();
  for (const auto& c : r.results)
    results.push_back({{"check", to_string(c.check)},
                       {"distribution", c.distribution},
                       {"distortion", c.distortion},
                       {"status", to_string(c.status)},
                       {"max_error", c.max_error},
                       {"detail", c.detail}});
  return {{"schema", "qrisk.suite/1"},
          {"ok", r.ok()},
          {"summary",
           {{"pass", r.count(CheckStatus::Pass)},
            {"fail", r.count(CheckStatus::Fail)},
            {"expected_failure", r.count(CheckStatus::ExpectedFailure)},
            {"skipped", r.count(CheckStatus::Skipped)}}},
          {"results", results}};
}

} // namespace detail

} // namespace qrisk
