#include "qrisk/classify.hpp"

#include "qrisk/numeric.hpp"

#include "format.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

namespace qrisk {

using detail::format_number;

const char* to_string(DomainClass c) {
  switch (c) {
  case DomainClass::LQ: return "LQ";
  case DomainClass::Acerbi: return "Acerbi";
  case DomainClass::Pichler: return "Pichler";
  }
  return "unknown";
}

const char* to_string(Verdict v) {
  switch (v) {
  case Verdict::Member: return "member";
  case Verdict::NonMember: return "non-member";
  case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

const char* to_string(ClassifyMethod m) {
  switch (m) {
  case ClassifyMethod::Auto: return "auto";
  case ClassifyMethod::Analytic: return "analytic";
  case ClassifyMethod::Probe: return "probe";
  }
  return "unknown";
}

namespace {

std::optional<double> larger(std::optional<double> a, std::optional<double> b) {
  if (!a)
    return b;
  if (!b)
    return a;
  return std::max(*a, *b);
}

MembershipVerdict analytic(const Distribution& x, const Distortion& d, DomainClass domain) {
  MembershipVerdict v;
  v.domain = domain;
  v.method = ClassifyMethod::Analytic;
  const auto tails = x.tails();
  const bool near_one = d.has_mass_near_one();
  const auto p0 = d.density_exponent_at_zero();

  auto upper_fails = [&](std::optional<double> b, const char* what) -> bool {
    if (b && near_one && *b >= 1.0) {
      v.reason = std::string(what) + " grows like (1-u)^-" + format_number(*b) +
                 " near u=1 where Q has a bounded positive density; exponent >= 1 is not integrable";
      return true;
    }
    return false;
  };

  bool member = true;
  switch (domain) {
  case DomainClass::LQ: member = !upper_fails(tails.upper, "the quantile function"); break;
  case DomainClass::Acerbi:
    member = !upper_fails(tails.upper, "the quantile function");
    if (member && tails.lower && p0 && *tails.lower >= *p0) {
      member = false;
      v.reason = "|quantile| grows like u^-" + format_number(*tails.lower) + " near u=0 while Q has density ~ u^" +
                 format_number(*p0 - 1.0) + "; the product is not integrable";
    }
    break;
  case DomainClass::Pichler:
    member = !upper_fails(larger(tails.lower, tails.upper), "the quantile function of |X|");
    break;
  }
  v.verdict = member ? Verdict::Member : Verdict::NonMember;
  if (member)
    v.reason = "tail exponents of the quantile function are integrable against Q";
  return v;
}

// Integral of h against Q over u in (a, b] (or [a, b) near 1, via t = 1 - u).
class ShellIntegrator {
public:
  ShellIntegrator(const Distortion& d, std::function<double(double)> h, std::function<double(double)> h_tail)
      : d_(d), h_(std::move(h)), h_tail_(std::move(h_tail)) {}

  double near_zero(double a, double b) const {
    if (d_.is_opaque())
      return stieltjes(a, b, false);
    double total = 0.0;
    const auto& pieces = d_.pieces();
    for (std::size_t i = 1; i < pieces.size(); ++i) {
      const double u = pieces[i].lo;
      const double jump = pieces[i](u) - pieces[i - 1](u);
      if (jump > 0.0 && u > a && u <= b)
        total += jump * h_(u);
    }
    for (const auto& p : pieces) {
      const double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
      if (p.term.is_constant() || !(lo < hi))
        continue;
      const auto dens = p.term.derivative();
      total += numeric::integrate([&](double u) { return h_(u) * dens(u); }, lo, hi, {1e-15, 1e-12, 400}).value;
    }
    return total;
  }

  // Over u in [1 - tb, 1 - ta), ta < tb.
  double near_one(double ta, double tb) const {
    if (d_.is_opaque())
      return stieltjes(ta, tb, true);
    double total = 0.0;
    const auto& pieces = d_.pieces();
    for (std::size_t i = 1; i < pieces.size(); ++i) {
      const double u = pieces[i].lo;
      const double jump = pieces[i](u) - pieces[i - 1](u);
      const double t = 1.0 - u;
      if (jump > 0.0 && t > ta && t <= tb)
        total += jump * h_tail_(t);
    }
    for (const auto& p : pieces) {
      const double lo = std::max(ta, 1.0 - p.hi), hi = std::min(tb, 1.0 - p.lo);
      if (p.term.is_constant() || !(lo < hi))
        continue;
      const auto dens = p.term.derivative();
      total += numeric::integrate([&](double t) { return h_tail_(t) * dens(1.0 - t); }, lo, hi, {1e-15, 1e-12, 400})
                   .value;
    }
    return total;
  }

private:
  // Riemann-Stieltjes sum for distortions without a piecewise form.
  double stieltjes(double a, double b, bool tail) const {
    constexpr int n = 256;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double lo = a + (b - a) * i / n, hi = a + (b - a) * (i + 1) / n;
      const double mid = 0.5 * (lo + hi);
      const double mass = tail ? d_.complement(hi) - d_.complement(lo) : d_(hi) - d_(lo);
      total += mass * (tail ? h_tail_(mid) : h_(mid));
    }
    return total;
  }

  const Distortion& d_;
  std::function<double(double)> h_, h_tail_;
};

bool sustained_growth(const std::vector<double>& inc, const ProbeOptions& o) {
  const int n = static_cast<int>(inc.size());
  if (n < o.growth_window)
    return false;
  for (int i = n - o.growth_window; i < n; ++i) {
    if (!(inc[i] > o.growth_threshold))
      return false;
    if (i > n - o.growth_window && inc[i] < inc[i - 1] * (1.0 - 1e-9))
      return false;
  }
  return true;
}

// Increments below the Cauchy tolerance, or shrinking by a fixed ratio over
// the window so that the remaining tail is bounded by a geometric series.
bool settled(const std::vector<double>& inc, const ProbeOptions& o, double& tail_bound) {
  const int n = static_cast<int>(inc.size());
  if (n == 0)
    return false;
  if (std::fabs(inc.back()) < o.cauchy_tol) {
    tail_bound = std::fabs(inc.back());
    return true;
  }
  if (n <= o.growth_window)
    return false;
  double worst = 0.0;
  for (int i = n - o.growth_window; i < n; ++i) {
    if (!(inc[i] > 0.0) || !(inc[i - 1] > 0.0))
      return false;
    worst = std::max(worst, inc[i] / inc[i - 1]);
  }
  if (!(worst <= o.decay_ratio))
    return false;
  tail_bound = inc.back() * worst / (1.0 - worst);
  return true;
}

MembershipVerdict probe(const Distribution& x, const Distortion& d, DomainClass domain, const ProbeOptions& o) {
  MembershipVerdict v;
  v.domain = domain;
  v.method = ClassifyMethod::Probe;

  std::function<double(double)> h, h_tail;
  std::optional<Distribution> abs;
  switch (domain) {
  case DomainClass::LQ:
    h = [&](double u) { return std::max(x.quantile_lower(u), 0.0); };
    h_tail = [&](double t) { return std::max(x.quantile_lower_tail(t), 0.0); };
    break;
  case DomainClass::Acerbi:
    h = [&](double u) { return std::fabs(x.quantile_lower(u)); };
    h_tail = [&](double t) { return std::fabs(x.quantile_lower_tail(t)); };
    break;
  case DomainClass::Pichler:
    abs = x.absolute();
    h = [&](double u) { return abs->quantile_lower(u); };
    h_tail = [&](double t) { return abs->quantile_lower_tail(t); };
    break;
  }
  const ShellIntegrator integrator(d, h, h_tail);

  numeric::CompensatedSum partial;
  v.partial_integrals.push_back(0.0); // k = 1: the interval (1/2, 1/2) is empty
  for (int k = 2; k <= o.levels; ++k) {
    const double outer = std::ldexp(1.0, -k), inner = std::ldexp(1.0, 1 - k);
    const double z = integrator.near_zero(outer, inner);
    const double w = integrator.near_one(outer, inner);
    v.increments_near_zero.push_back(z);
    v.increments_near_one.push_back(w);
    partial.add(z);
    partial.add(w);
    v.partial_integrals.push_back(partial.value());
  }

  const double last = v.increments_near_zero.back() + v.increments_near_one.back();
  if (!std::isfinite(last)) {
    v.verdict = Verdict::Inconclusive;
    v.reason = "partial integrals are not finite";
  } else if (sustained_growth(v.increments_near_zero, o) || sustained_growth(v.increments_near_one, o)) {
    v.verdict = Verdict::NonMember;
    v.reason = "the last " + std::to_string(o.growth_window) + " dyadic increments exceed " +
               format_number(o.growth_threshold) + " and do not decrease";
  } else if (std::fabs(last) < o.cauchy_tol) {
    v.verdict = Verdict::Member;
    v.reason = "partial integrals are Cauchy: last increment " + format_number(last);
  } else if (double bz = 0.0, bo = 0.0;
             settled(v.increments_near_zero, o, bz) && settled(v.increments_near_one, o, bo)) {
    v.verdict = Verdict::Member;
    v.reason = "dyadic increments decay geometrically; remaining tail at most " + format_number(bz + bo);
  } else {
    v.verdict = Verdict::Inconclusive;
    v.reason = "last increment " + format_number(last) + " is neither below " + format_number(o.cauchy_tol) +
               " nor in sustained growth";
  }
  return v;
}

} // namespace

MembershipVerdict classify(const Distribution& x, const Distortion& d, DomainClass domain, ClassifyMethod method,
                           const ProbeOptions& probe_options) {
  if (x.is_discrete() && method != ClassifyMethod::Probe) {
    MembershipVerdict v;
    v.domain = domain;
    v.verdict = Verdict::Member;
    v.method = ClassifyMethod::Analytic;
    v.reason = "finitely many finite quantile values";
    return v;
  }
  if (method == ClassifyMethod::Analytic && d.is_opaque())
    throw UnsupportedError("the analytic rule needs a piecewise distortion");
  if (method == ClassifyMethod::Probe || d.is_opaque())
    return probe(x, d, domain, probe_options);
  return analytic(x, d, domain);
}

} // namespace qrisk
