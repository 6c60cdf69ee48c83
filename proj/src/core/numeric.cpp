#include "qrisk/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace qrisk::numeric {

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x))
    correction_ += (sum_ - t) + x;
  else
    correction_ += (x - t) + sum_;
  sum_ = t;
}

double compensated_sum(std::span<const double> terms) noexcept {
  CompensatedSum s;
  for (double t : terms)
    s.add(t);
  return s.value();
}

namespace {

// QUADPACK qk21 abscissae and weights.
constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525478215, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Gauss weights for the odd-indexed Kronrod nodes (xgk[1], xgk[3], ..., xgk[9]).
constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

} // namespace

QuadratureResult gauss_kronrod21(const Integrand& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = kWgk[10] * fc;
  double gauss = 0.0;
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(centre - dx) + f(centre + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1)
      gauss += kWg[j / 2] * pair;
  }
  QuadratureResult r;
  r.value = kronrod * half;
  r.error = std::fabs((kronrod - gauss) * half);
  r.converged = std::isfinite(r.value);
  r.evaluations = 21;
  return r;
}

QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& options) {
  QuadratureResult total;
  if (a == b)
    return QuadratureResult{0.0, 0.0, true, 0};
  if (!(a < b)) {
    auto r = integrate(f, b, a, options);
    r.value = -r.value;
    return r;
  }

  std::priority_queue<Panel> panels;
  auto first = gauss_kronrod21(f, a, b);
  total.evaluations = first.evaluations;
  if (!std::isfinite(first.value)) {
    total.value = first.value;
    total.error = std::numeric_limits<double>::infinity();
    return total;
  }
  panels.push({a, b, first.value, first.error});
  double value = first.value;
  double error = first.error;

  int count = 1;
  while (error > std::max(options.abs_tol, options.rel_tol * std::fabs(value))) {
    if (count >= options.max_intervals)
      break;
    Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b))
      break; // panel cannot be split further
    panels.pop();
    auto left = gauss_kronrod21(f, worst.a, mid);
    auto right = gauss_kronrod21(f, mid, worst.b);
    total.evaluations += 42;
    if (!std::isfinite(left.value) || !std::isfinite(right.value)) {
      total.value = left.value + right.value;
      total.error = std::numeric_limits<double>::infinity();
      return total;
    }
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push({worst.a, mid, left.value, left.error});
    panels.push({mid, worst.b, right.value, right.error});
    ++count;
  }

  // Re-sum from scratch; the running totals accumulate cancellation.
  CompensatedSum v, e;
  while (!panels.empty()) {
    v.add(panels.top().value);
    e.add(panels.top().error);
    panels.pop();
  }
  total.value = v.value();
  total.error = e.value();
  total.converged = total.error <= std::max(options.abs_tol, options.rel_tol * std::fabs(total.value));
  return total;
}

namespace {

class ShellAccumulator {
public:
  explicit ShellAccumulator(const ShellOptions& options) : options_(options) {}

  // Returns true once the sequence is decided (converged or divergent).
  bool push(double increment, double panel_error) {
    result_.increments.push_back(increment);
    sum_.add(increment);
    error_.add(panel_error);
    const auto& inc = result_.increments;
    const int k = static_cast<int>(inc.size());
    if (k < options_.min_levels)
      return false;

    const double tol = std::max(options_.abs_tol, options_.rel_tol * std::fabs(sum_.value()));

    if (inc[k - 1] == 0.0 && inc[k - 2] == 0.0 && inc[k - 3] == 0.0)
      return finish(ShellStatus::Converged, 0.0, 0.0);

    // Ratios of consecutive shells, most recent last.
    double ratios[5];
    int n_ratios = 0;
    for (int i = std::max(1, k - 5); i < k; ++i) {
      if (inc[i - 1] == 0.0 || (inc[i] > 0) != (inc[i - 1] > 0) || inc[i] == 0.0) {
        n_ratios = 0;
        continue;
      }
      ratios[n_ratios++] = inc[i] / inc[i - 1];
    }

    if (k >= options_.divergence_levels && n_ratios == 5) {
      const bool sustained = std::all_of(ratios, ratios + 5, [](double r) { return r >= 1.0 - 1e-9; });
      if (sustained)
        return finish(ShellStatus::Diverged, 0.0, 0.0);
    }

    if (n_ratios >= 2) {
      const double r = std::max(ratios[n_ratios - 1], ratios[n_ratios - 2]);
      if (r < 1.0) {
        const double tail = inc[k - 1] * r / (1.0 - r);
        if (std::fabs(tail) <= tol)
          return finish(ShellStatus::Converged, tail, std::fabs(tail));
        if (n_ratios == 5 && r < 1.0 - 1e-6) {
          const auto [lo, hi] = std::minmax_element(ratios, ratios + 5);
          const double spread = *hi - *lo;
          const double tail_error = std::fabs(tail) * spread / (1.0 - r) + std::fabs(inc[k - 1]) * 1e-13;
          if (tail_error <= tol)
            return finish(ShellStatus::Converged, tail, tail_error);
        }
      }
    }
    return false;
  }

  ShellResult finish_undecided() {
    finish(ShellStatus::Undecided, 0.0, std::numeric_limits<double>::infinity());
    return std::move(result_);
  }

  ShellResult take() { return std::move(result_); }

private:
  bool finish(ShellStatus status, double tail, double tail_error) {
    result_.status = status;
    result_.value = sum_.value() + tail;
    result_.error = error_.value() + tail_error;
    if (status == ShellStatus::Diverged)
      result_.value = std::numeric_limits<double>::infinity() * (result_.increments.back() > 0 ? 1 : -1);
    return true;
  }

  const ShellOptions& options_;
  ShellResult result_;
  CompensatedSum sum_;
  CompensatedSum error_;
};

} // namespace

ShellResult integrate_shrinking(const Integrand& f, double width, const ShellOptions& options) {
  ShellAccumulator acc(options);
  double hi = width;
  for (int k = 1; k <= options.max_levels; ++k) {
    const double lo = 0.5 * hi;
    if (!(lo > 0.0) || !(lo < hi))
      break;
    auto panel = integrate(f, lo, hi, options.panel);
    if (!std::isfinite(panel.value))
      return acc.finish_undecided();
    if (acc.push(panel.value, panel.error))
      return acc.take();
    hi = lo;
  }
  return acc.finish_undecided();
}

ShellResult integrate_growing(const Integrand& f, double width, const ShellOptions& options) {
  ShellAccumulator acc(options);
  double lo = 0.0;
  double step = width;
  for (int k = 0; k < options.max_levels; ++k) {
    const double hi = lo + step;
    if (!std::isfinite(hi))
      break;
    auto panel = integrate(f, lo, hi, options.panel);
    if (!std::isfinite(panel.value))
      return acc.finish_undecided();
    if (acc.push(panel.value, panel.error))
      return acc.take();
    lo = hi;
    step *= 2.0;
  }
  return acc.finish_undecided();
}

double bisect_boundary(const std::function<bool(double)>& holds, double lo, double hi) {
  for (;;) {
    const double mid = lo + 0.5 * (hi - lo);
    if (!(mid > lo && mid < hi))
      return lo;
    if (holds(mid))
      lo = mid;
    else
      hi = mid;
  }
}

} // namespace qrisk::numeric
