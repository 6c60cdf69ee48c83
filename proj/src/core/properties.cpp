#include "qrisk/properties.hpp"

#include "qrisk/numeric.hpp"

#include "format.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace qrisk {

using detail::format_number;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Distribution from_weight_map(const std::map<double, std::uint64_t>& weights, std::uint64_t total) {
  std::vector<double> values, levels;
  std::uint64_t cum = 0;
  for (const auto& [v, w] : weights) {
    cum += w;
    values.push_back(v);
    levels.push_back(static_cast<double>(cum) / static_cast<double>(total));
  }
  return Distribution::from_levels(values, levels);
}

Distribution from_mass_map(const std::map<double, double>& masses) {
  std::vector<Atom> atoms;
  for (const auto& [v, p] : masses)
    atoms.push_back({v, p});
  return Distribution::discrete(std::move(atoms));
}

} // namespace

JointTable JointTable::from_cells(std::vector<JointCell> cells) {
  std::map<std::pair<double, double>, double> merged;
  numeric::CompensatedSum total;
  for (const auto& c : cells) {
    if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.probability) || c.probability < 0.0)
      throw DomainError("joint table cells need finite values and non-negative probabilities");
    if (c.probability == 0.0)
      continue;
    merged[{c.x, c.y}] += c.probability;
    total.add(c.probability);
  }
  if (merged.empty() || std::fabs(total.value() - 1.0) > 1e-12)
    throw DomainError("joint table probabilities must sum to 1, got " + format_number(total.value()));
  std::vector<JointCell> out;
  std::map<double, double> xs, ys, sums;
  for (const auto& [key, p] : merged) {
    out.push_back({key.first, key.second, p});
    xs[key.first] += p;
    ys[key.second] += p;
    sums[key.first + key.second] += p;
  }
  return JointTable(std::move(out), from_mass_map(xs), from_mass_map(ys), from_mass_map(sums));
}

JointTable JointTable::from_counts(const std::vector<double>& xs, const std::vector<double>& ys,
                                   const std::vector<std::vector<std::uint32_t>>& counts) {
  if (counts.size() != xs.size())
    throw DomainError("count matrix needs one row per x value");
  std::map<double, std::uint64_t> wx, wy, ws;
  std::uint64_t total = 0;
  std::vector<std::pair<JointCell, std::uint64_t>> raw;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (counts[i].size() != ys.size())
      throw DomainError("count matrix needs one column per y value");
    for (std::size_t j = 0; j < ys.size(); ++j) {
      const std::uint64_t w = counts[i][j];
      if (w == 0)
        continue;
      total += w;
      wx[xs[i]] += w;
      wy[ys[j]] += w;
      ws[xs[i] + ys[j]] += w;
      raw.push_back({{xs[i], ys[j], 0.0}, w});
    }
  }
  if (total == 0)
    throw DomainError("joint table needs a positive total weight");
  std::vector<JointCell> cells;
  for (auto& [c, w] : raw)
    cells.push_back({c.x, c.y, static_cast<double>(w) / static_cast<double>(total)});
  return JointTable(std::move(cells), from_weight_map(wx, total), from_weight_map(wy, total),
                    from_weight_map(ws, total));
}

CounterexampleReport build_counterexample(const Distortion& d, double a) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw DomainError("counterexample parameter a must be positive, got " + format_number(a));
  const auto convexity = is_convex(d);
  if (convexity.convex)
    throw NoCounterexampleError("distortion " + d.name() +
                                " is convex, so rho_Q is subadditive and no counterexample exists");
  if (!convexity.witness || !(convexity.witness->eps > 0.0))
    throw Error("no midpoint-convexity witness found for " + d.name());
  const auto w = *convexity.witness;
  const double u = w.u, e = w.eps;
  const double x0 = -(a + e), y1 = -(a + 0.5 * e);

  auto table = JointTable::from_cells({{x0, x0, u - e}, {x0, 0.0, e}, {0.0, y1, e}, {0.0, 0.0, 1.0 - u - e}});
  CounterexampleReport r{w, a, table};

  const double sum_values[4] = {2.0 * x0, x0, y1, 0.0};
  const double sum_levels[4] = {u - e, u, u + e, 1.0};
  const auto expected = Distribution::from_levels(sum_values, sum_levels);
  const auto got = table.sum().atoms();
  const auto want = expected.atoms();
  r.sum_matches_table = got.size() == want.size();
  for (std::size_t i = 0; r.sum_matches_table && i < got.size(); ++i)
    r.sum_matches_table = got[i].value == want[i].value && std::fabs(got[i].probability - want[i].probability) <= 1e-15;

  // Marginals and sum on the exact levels of the table.
  const double x_values[2] = {x0, 0.0}, x_levels[2] = {u, 1.0};
  const double y_values[3] = {x0, y1, 0.0}, y_levels[3] = {u - e, u, 1.0};
  r.rho_x = rho_quantile(Distribution::from_levels(x_values, x_levels), d).value;
  r.rho_y = rho_quantile(Distribution::from_levels(y_values, y_levels), d).value;
  r.rho_sum = rho_quantile(expected, d).value;
  r.gap = r.rho_sum - r.rho_x - r.rho_y;

  const double dm = d(u - e), du = d(u), dp = d(u + e);
  r.rho_x_identity = -(a + e) * du;
  r.rho_y_identity = -(0.5 * e) * dm - (a + 0.5 * e) * du;
  r.rho_sum_identity = -(a + e) * dm - (0.5 * e) * du - (a + 0.5 * e) * dp;
  r.gap_identity = (a + 0.5 * e) * (2.0 * du - dm - dp);
  return r;
}

JointTable random_joint_table(std::uint64_t seed, std::uint64_t trial) {
  std::mt19937_64 rng(splitmix64(seed + trial));
  std::uniform_int_distribution<int> size(1, 8);
  std::uniform_int_distribution<std::uint32_t> weight(0, 9);
  std::bernoulli_distribution sparse(0.3);

  std::vector<int> pool(21);
  std::iota(pool.begin(), pool.end(), -10);
  auto pick = [&](int n) {
    std::vector<int> v;
    std::sample(pool.begin(), pool.end(), std::back_inserter(v), n, rng);
    return std::vector<double>(v.begin(), v.end());
  };
  const auto xs = pick(size(rng));
  const auto ys = pick(size(rng));
  std::vector<std::vector<std::uint32_t>> counts(xs.size(), std::vector<std::uint32_t>(ys.size()));
  std::uint32_t total = 0;
  for (auto& row : counts)
    for (auto& c : row) {
      c = sparse(rng) ? 0 : weight(rng);
      total += c;
    }
  if (total == 0)
    counts[0][0] = 1;
  return JointTable::from_counts(xs, ys, counts);
}

SubadditivityReport subadditivity_search(const Distortion& d, const SearchOptions& options) {
  SubadditivityReport report;
  auto check = [&](const JointTable& t, std::uint64_t trial, bool extra) {
    const double rx = rho_quantile(t.first(), d).value;
    const double ry = rho_quantile(t.second(), d).value;
    const double rs = rho_quantile(t.sum(), d).value;
    const double gap = rs - rx - ry;
    ++report.trials;
    report.max_gap = std::max(report.max_gap, gap);
    report.max_abs_gap = std::max(report.max_abs_gap, std::fabs(gap));
    if (gap > options.slack) {
      ++report.violations;
      if (!report.worst || gap > report.worst->gap)
        report.worst = SubadditivityViolation{t, trial, extra, rx, ry, rs, gap};
    }
  };
  for (std::size_t i = 0; i < options.extra_tables.size(); ++i)
    check(options.extra_tables[i], i, true);
  for (std::uint64_t i = 0; i < options.trials; ++i)
    check(random_joint_table(options.seed, i), i, false);
  return report;
}

ComonotoneCheck comonotone_additivity_check(const Distortion& d, const Distribution& d1, const Distribution& d2,
                                            double tolerance, const RiskOptions& options) {
  ComonotoneCheck c{rho_quantile(d1, d, options), rho_quantile(d2, d, options),
                    rho_quantile(comonotone_sum(d1, d2), d, options)};
  if (c.rho_first.is_finite() && c.rho_second.is_finite() && c.rho_sum.is_finite()) {
    c.difference = c.rho_sum.value - c.rho_first.value - c.rho_second.value;
    c.passed = std::fabs(c.difference) <= tolerance;
  }
  return c;
}

} // namespace qrisk
