// Brute-force reference computations used by the tests. Nothing here calls
// into the library: distortions are plain lambdas and discrete laws are
// (value, probability) lists.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace oracle {

using Law = std::vector<std::pair<double, double>>;
using Dfun = std::function<double(double)>;

inline Law empirical(const std::vector<double>& xs) {
  std::map<double, double> m;
  for (double x : xs) m[x] += 1.0 / xs.size();
  return {m.begin(), m.end()};
}

inline Law sorted(Law law) {
  std::map<double, double> m;
  for (auto [x, p] : law) m[x] += p;
  return {m.begin(), m.end()};
}

inline double cdf(const Law& law, double t) {
  long double s = 0;
  for (auto [x, p] : law)
    if (x <= t) s += p;
  return static_cast<double>(s);
}

// inf{x : F(x) >= u}, scanning the support points.
inline double quantile_lower(const Law& law, double u) {
  Law l = sorted(law);
  long double s = 0;
  for (auto [x, p] : l) {
    s += p;
    if (s >= u - 1e-15) return x;
  }
  return l.back().first;
}

// sup{x : F(x) <= u}.
inline double quantile_upper(const Law& law, double u) {
  Law l = sorted(law);
  long double s = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    s += l[i].second;
    if (s > u + 1e-15) return l[i].first;
  }
  return l.back().first;
}

// int q dQ = sum_i x_i (D(F_i) - D(F_{i-1})) with q = x_i on (F_{i-1}, F_i].
inline double rho(const Law& law, const Dfun& d) {
  Law l = sorted(law);
  long double s = 0, prev = 0, acc = 0;
  for (auto [x, p] : l) {
    acc += p;
    double hi = acc >= 1.0L - 1e-15L ? 1.0 : static_cast<double>(acc);
    s += x * (d(hi) - d(static_cast<double>(prev)));
    prev = hi;
  }
  return static_cast<double>(s);
}

inline double mean(const Law& law) {
  long double s = 0;
  for (auto [x, p] : law) s += x * p;
  return static_cast<double>(s);
}

inline Dfun identity() {
  return [](double u) { return u; };
}
inline Dfun var(double a) {
  return [a](double u) { return u >= a ? 1.0 : 0.0; };
}
inline Dfun es(double a) {
  return [a](double u) { return u <= a ? 0.0 : (u - a) / (1 - a); };
}
inline Dfun es_n(int n, double a) {
  return [n, a](double u) { return u <= a ? 0.0 : std::pow((u - a) / (1 - a), n); };
}
inline Dfun threshold(double delta) {
  return [delta](double u) { return u < delta ? u : 1.0; };
}
inline Dfun sqrt_example() {
  return [](double u) { return u < 0.25 ? 0.5 * std::sqrt(u) : u; };
}

// Minimum of c + E[(X - c)^+] / (1 - a) over a fine grid of c plus the
// support points, where the piecewise linear objective attains its minimum.
inline double es_grid_min(const Law& law, double a) {
  auto g = [&](double c) {
    long double s = 0;
    for (auto [x, p] : law) s += p * std::max(x - c, 0.0);
    return static_cast<double>(c + s / (1 - a));
  };
  double best = std::numeric_limits<double>::infinity();
  for (auto [x, p] : law) best = std::min(best, g(x));
  return best;
}

} // namespace oracle
