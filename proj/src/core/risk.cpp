#include "qrisk/risk.hpp"

#include "qrisk/numeric.hpp"

#include "format.hpp"

#include <algorithm>
#include <cmath>

namespace qrisk {

using detail::format_number;
using numeric::CompensatedSum;
using numeric::ShellStatus;

std::string to_string(const ExtendedRisk& r) {
  switch (r.kind) {
  case RiskKind::Finite: return format_number(r.value);
  case RiskKind::NegInfinity: return "-inf";
  case RiskKind::NotInDomain: return "not-in-domain";
  }
  return {};
}

const char* to_string(Representation r) {
  switch (r) {
  case Representation::Quantile: return "quantile";
  case Representation::Choquet: return "choquet";
  case Representation::Mixture: return "mixture";
  case Representation::ClosedForm: return "closed-form";
  case Representation::Infimum: return "infimum";
  }
  return "unknown";
}

const char* to_string(DomainRelation r) {
  switch (r) {
  case DomainRelation::Equal: return "equal";
  case DomainRelation::FirstSubsetSecond: return "first-subset-second";
  case DomainRelation::SecondSubsetFirst: return "second-subset-first";
  case DomainRelation::EqualToExpectationDomain: return "equal-to-expectation-domain";
  case DomainRelation::Incomparable: return "incomparable";
  }
  return "unknown";
}

namespace {

// One non-negative part of an integral (positive or negative side).
class Part {
public:
  explicit Part(const RiskOptions& o) : tol_(o.tolerance) {
    shell_.abs_tol = tol_ * 0.05;
    shell_.rel_tol = 1e-13;
    shell_.panel = {tol_ * 1e-4, 1e-13, 2000};
    panel_ = {tol_ * 1e-4, 1e-13, 4000};
  }

  void add(double v) { sum_.add(v); }

  void regular(const numeric::Integrand& f, double a, double b) {
    if (!(a < b))
      return;
    const auto r = numeric::integrate(f, a, b, panel_);
    if (!std::isfinite(r.value) || r.error > tol_) {
      undecided_ = true;
      note_ = "adaptive quadrature on [" + format_number(a) + ", " + format_number(b) +
              "] stopped with error estimate " + format_number(r.error);
      return;
    }
    sum_.add(r.value);
  }

  void absorb(const numeric::ShellResult& r) {
    switch (r.status) {
    case ShellStatus::Converged: sum_.add(r.value); break;
    case ShellStatus::Diverged: diverged_ = true; break;
    case ShellStatus::Undecided: {
      undecided_ = true;
      note_ = "improper integral neither converged nor diverged; last shell increments:";
      const auto n = r.increments.size();
      for (std::size_t i = n > 5 ? n - 5 : 0; i < n; ++i)
        note_ += " " + format_number(r.increments[i]);
      break;
    }
    }
  }

  void shrinking(const numeric::Integrand& f, double width) { absorb(numeric::integrate_shrinking(f, width, shell_)); }
  void growing(const numeric::Integrand& f, double width) { absorb(numeric::integrate_growing(f, width, shell_)); }

  // Integral over [a, b] of f, with shells toward an end where the
  // integrand may blow up. `tail(t)` evaluates f(b - t) accurately.
  void segment(const numeric::Integrand& f, const numeric::Integrand& tail, double a, double b, bool singular_lo,
               bool singular_hi) {
    if (!(a < b))
      return;
    if (!singular_lo && !singular_hi) {
      regular(f, a, b);
      return;
    }
    const double m = a + 0.5 * (b - a);
    if (singular_lo)
      shrinking([&](double h) { return f(a + h); }, m - a);
    else
      regular(f, a, m);
    if (singular_hi)
      shrinking(tail, b - m);
    else
      regular(f, m, b);
  }

  // Integral of g over [c, inf), split at the given points.
  void right_of(const numeric::Integrand& g, double c, std::vector<double> points, double width) {
    std::sort(points.begin(), points.end());
    double prev = c;
    for (double p : points) {
      if (!(p > prev) || !std::isfinite(p))
        continue;
      regular(g, prev, p);
      prev = p;
    }
    growing([&](double h) { return g(prev + h); }, width);
  }

  // Integral of g over (-inf, c].
  void left_of(const numeric::Integrand& g, double c, std::vector<double> points, double width) {
    std::sort(points.begin(), points.end(), std::greater<>());
    double prev = c;
    for (double p : points) {
      if (!(p < prev) || !std::isfinite(p))
        continue;
      regular(g, p, prev);
      prev = p;
    }
    growing([&](double h) { return g(prev - h); }, width);
  }

  double value() const { return sum_.value(); }
  bool diverged() const { return diverged_; }
  bool undecided() const { return undecided_; }
  const std::string& note() const { return note_; }

private:
  double tol_;
  numeric::ShellOptions shell_;
  numeric::QuadratureOptions panel_;
  CompensatedSum sum_;
  bool diverged_ = false;
  bool undecided_ = false;
  std::string note_;
};

ExtendedRisk combine(const Part& pos, const Part& neg, const char* what) {
  if (pos.diverged())
    return ExtendedRisk::not_in_domain();
  if (pos.undecided() || neg.undecided())
    throw InconclusiveError(std::string(what) + ": " + (pos.undecided() ? pos.note() : neg.note()));
  if (neg.diverged())
    return ExtendedRisk::neg_infinity();
  return ExtendedRisk::finite(pos.value() - neg.value());
}

void check_alpha(double alpha, bool allow_zero) {
  const bool ok = allow_zero ? (alpha >= 0.0 && alpha < 1.0) : (alpha > 0.0 && alpha < 1.0);
  if (!ok)
    throw DomainError(std::string("alpha must lie in ") + (allow_zero ? "[0,1)" : "(0,1)") + ", got " +
                      format_number(alpha));
}

// Discrete helpers ------------------------------------------------------------

double discrete_mean(const Distribution& x) {
  CompensatedSum s;
  for (const auto& a : x.atoms())
    s.add(a.value * a.probability);
  return s.value();
}

double discrete_stop_loss(const Distribution& x, double c) {
  CompensatedSum s;
  for (const auto& a : x.atoms())
    if (a.value > c)
      s.add((a.value - c) * a.probability);
  return s.value();
}

ExtendedRisk rho_quantile_discrete(const Distribution& x, const Distortion& d) {
  const auto atoms = x.atoms();
  const auto levels = x.levels();
  CompensatedSum s;
  double prev = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double level = levels[i];
    const auto slope = d.slope_on(prev, level);
    const double mass = slope ? *slope * atoms[i].probability : d(level) - d(prev);
    if (mass != 0.0)
      s.add(atoms[i].value * mass);
    prev = level;
  }
  return ExtendedRisk::finite(s.value());
}

ExtendedRisk rho_choquet_discrete(const Distribution& x, const Distortion& d) {
  const auto atoms = x.atoms();
  const auto levels = x.levels();
  CompensatedSum pos, neg;
  if (atoms.front().value > 0.0)
    pos.add(atoms.front().value);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const double lo = atoms[i].value;
    const double hi = i + 1 < atoms.size() ? atoms[i + 1].value : std::numeric_limits<double>::infinity();
    const double dv = d(levels[i]);
    // F = levels[i] on [lo, hi).
    if (hi > 0.0 && i + 1 < atoms.size()) {
      const double len = hi - std::max(lo, 0.0);
      if (dv < 1.0)
        pos.add((1.0 - dv) * len);
    }
    if (lo < 0.0) {
      const double len = std::min(hi, 0.0) - lo;
      if (dv > 0.0)
        neg.add(dv * len);
    }
  }
  return ExtendedRisk::finite(pos.value() - neg.value());
}

// Continuous helpers ----------------------------------------------------------

ExtendedRisk rho_quantile_general(const Distribution& x, const Distortion& d, const RiskOptions& options) {
  const auto& pieces = d.pieces();
  const auto tails = x.tails();
  const double u0 = x.cdf(0.0);
  Part pos(options), neg(options);

  for (std::size_t i = 1; i < pieces.size(); ++i) {
    const double u = pieces[i].lo;
    const double jump = pieces[i](u) - pieces[i - 1](u);
    if (jump <= 0.0)
      continue;
    const double q = x.quantile_lower(u);
    (q > 0.0 ? pos : neg).add(jump * std::fabs(q));
  }

  for (const auto& p : pieces) {
    if (p.term.is_constant())
      continue;
    const PowerTerm dens = p.term.derivative();
    const bool singular_density = dens.exponent < 0.0 && dens.origin == p.lo;
    std::vector<double> cuts{p.lo};
    if (u0 > p.lo && u0 < p.hi)
      cuts.push_back(u0);
    cuts.push_back(p.hi);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k], b = cuts[k + 1];
      const bool negative = b <= u0;
      const double sign = negative ? -1.0 : 1.0;
      auto f = [&](double u) { return sign * x.quantile_lower(u) * dens(u); };
      auto tail = [&](double t) {
        return b == 1.0 ? sign * x.quantile_lower_tail(t) * dens(1.0 - t) : f(b - t);
      };
      const bool sing_lo = (a == 0.0 && tails.lower) || (a == p.lo && singular_density);
      const bool sing_hi = b == 1.0 && tails.upper.has_value();
      (negative ? neg : pos).segment(f, tail, a, b, sing_lo, sing_hi);
    }
  }
  return combine(pos, neg, "rho (quantile representation)");
}

std::vector<double> choquet_points(const Distribution& x, const Distortion& d) {
  auto points = x.breakpoints();
  if (!d.is_opaque())
    for (double k : d.knots()) {
      points.push_back(x.quantile_lower(k));
      points.push_back(x.quantile_upper(k));
    }
  return points;
}

ExtendedRisk rho_choquet_general(const Distribution& x, const Distortion& d, const RiskOptions& options) {
  const auto points = choquet_points(x, d);
  const double width = x.scale_hint();
  Part pos(options), neg(options);
  pos.right_of([&](double t) { return d.complement(x.survival(t)); }, 0.0, points, width);
  neg.left_of([&](double t) { return d(x.cdf(t)); }, 0.0, points, width);
  return combine(pos, neg, "rho (Choquet representation)");
}

ExtendedRisk general_stop_loss(const Distribution& x, double c, const RiskOptions& options) {
  Part pos(options), none(options);
  pos.right_of([&](double t) { return x.survival(t); }, c, x.breakpoints(), x.scale_hint());
  return combine(pos, none, "stop-loss transform");
}

// E[(c - X)^+] = int_{-inf}^c F.
ExtendedRisk general_lower_stop_loss(const Distribution& x, double c, const RiskOptions& options) {
  Part pos(options), none(options);
  pos.left_of([&](double t) { return x.cdf(t); }, c, x.breakpoints(), x.scale_hint());
  return combine(pos, none, "lower stop-loss transform");
}

// ES_alpha given E[X] (which may be infinite or NotInDomain).
ExtendedRisk es_given_mean(const Distribution& x, double alpha, const ExtendedRisk& m, const RiskOptions& options) {
  if (alpha == 0.0)
    return m;
  const double q = x.quantile_lower(alpha);
  if (x.is_discrete())
    return ExtendedRisk::finite(q + discrete_stop_loss(x, q) / (1.0 - alpha));
  if (m.kind == RiskKind::NotInDomain)
    return m;
  if (alpha < 0.5 && m.is_finite() && x.tails().lower) {
    // E[(X-q)^+] = E[X] - q + E[(q-X)^+]; avoids cancelling a large negative q.
    const auto lower = general_lower_stop_loss(x, q, options);
    if (lower.is_finite())
      return ExtendedRisk::finite((m.value - alpha * q + lower.value) / (1.0 - alpha));
  }
  const auto sl = general_stop_loss(x, q, options);
  if (!sl.is_finite())
    return sl;
  return ExtendedRisk::finite(q + sl.value / (1.0 - alpha));
}

// Signed integral of the lower quantile from a to a fixed anchor. Dyadic
// shells toward 0 and 1 are accumulated once, so every call integrates a
// single panel of relative width at most one half.
class QuantileIntegral {
public:
  QuantileIntegral(const Distribution& x, const std::vector<double>& jumps, double anchor, const RiskOptions& o)
      : x_(x), jumps_(jumps), anchor_(anchor), tol_(o.tolerance), opts_{o.tolerance * 1e-4, 1e-13, 4000} {}

  double operator()(double a) const {
    if (a == anchor_)
      return 0.0;
    if (!(a > 0.0 && a < 1.0))
      throw DomainError("quantile integral needs a level in (0,1), got " + format_number(a));
    if (a < anchor_) {
      std::size_t k = 0;
      while (anchor_ * std::ldexp(1.0, -static_cast<int>(k + 1)) >= a)
        ++k;
      while (below_.size() <= k) {
        const auto j = static_cast<int>(below_.size());
        below_.push_back(below_.back() + plain(anchor_ * std::ldexp(1.0, -j), anchor_ * std::ldexp(1.0, 1 - j)));
      }
      return below_[k] + plain(a, anchor_ * std::ldexp(1.0, -static_cast<int>(k)));
    }
    const double gap = 1.0 - anchor_;
    std::size_t k = 0;
    while (1.0 - gap * std::ldexp(1.0, -static_cast<int>(k + 1)) <= a)
      ++k;
    while (above_.size() <= k) {
      const auto j = static_cast<int>(above_.size());
      above_.push_back(above_.back() + plain(1.0 - gap * std::ldexp(1.0, 1 - j), 1.0 - gap * std::ldexp(1.0, -j)));
    }
    return -(above_[k] + plain(1.0 - gap * std::ldexp(1.0, -static_cast<int>(k)), a));
  }

private:
  // Split at the levels where q jumps.
  double plain(double a, double b) const {
    CompensatedSum sum;
    double lo = a;
    for (auto it = std::upper_bound(jumps_.begin(), jumps_.end(), a);; ++it) {
      const double hi = (it == jumps_.end() || *it >= b) ? b : *it;
      if (lo < hi) {
        const auto r = numeric::integrate([&](double u) { return x_.quantile_lower(u); }, lo, hi, opts_);
        if (!std::isfinite(r.value) || r.error > tol_)
          throw InconclusiveError("rho (mixture representation): quantile integral on [" + format_number(lo) + ", " +
                                  format_number(hi) + "] did not converge");
        sum.add(r.value);
      }
      if (hi == b)
        break;
      lo = hi;
    }
    return sum.value();
  }

  const Distribution& x_;
  const std::vector<double>& jumps_;
  double anchor_, tol_;
  numeric::QuadratureOptions opts_;
  mutable std::vector<double> below_{0.0}, above_{0.0};
};

} // namespace

//------------------------------------------------------------------------------

ExtendedRisk rho_quantile(const Distribution& x, const Distortion& d, const RiskOptions& options) {
  if (x.is_discrete())
    return rho_quantile_discrete(x, d);
  if (d.is_opaque())
    throw UnsupportedError("the quantile representation of an opaque distortion needs a discrete distribution");
  return rho_quantile_general(x, d, options);
}

ExtendedRisk rho_choquet(const Distribution& x, const Distortion& d, const RiskOptions& options) {
  if (x.is_discrete())
    return rho_choquet_discrete(x, d);
  return rho_choquet_general(x, d, options);
}

double value_at_risk(const Distribution& x, double alpha) {
  check_alpha(alpha, false);
  return x.quantile_lower(alpha);
}

ExtendedRisk mean(const Distribution& x, const RiskOptions& options) {
  if (x.is_discrete())
    return ExtendedRisk::finite(discrete_mean(x));
  return rho_choquet_general(x, Distortion::expectation(), options);
}

ExtendedRisk stop_loss(const Distribution& x, double c, const RiskOptions& options) {
  if (!std::isfinite(c))
    throw DomainError("stop-loss level must be finite");
  if (x.is_discrete())
    return ExtendedRisk::finite(discrete_stop_loss(x, c));
  return general_stop_loss(x, c, options);
}

ExtendedRisk expected_shortfall(const Distribution& x, double alpha, const RiskOptions& options) {
  check_alpha(alpha, true);
  if (alpha == 0.0)
    return mean(x, options);
  if (x.is_discrete())
    return es_given_mean(x, alpha, ExtendedRisk::finite(0.0), options);
  const bool lower_form = alpha < 0.5 && x.tails().lower.has_value();
  const auto m = lower_form ? mean(x, options) : ExtendedRisk::finite(0.0);
  if (lower_form && !m.is_finite())
    return es_given_mean(x, alpha, ExtendedRisk::neg_infinity(), options);
  return es_given_mean(x, alpha, m, options);
}

InfimumResult expected_shortfall_infimum(const Distribution& x, double alpha, const InfimumSearch& search,
                                         const RiskOptions& options) {
  check_alpha(alpha, false);
  InfimumResult best;
  best.value = std::numeric_limits<double>::infinity();
  auto g = [&](double c) {
    ++best.evaluations;
    const auto sl = stop_loss(x, c, options);
    if (!sl.is_finite())
      throw DomainError("the infimum representation needs E[X^+] < inf");
    const double v = c + sl.value / (1.0 - alpha);
    if (v < best.value) {
      best.value = v;
      best.minimizer = c;
    }
    return v;
  };

  double lo = x.quantile_lower(0.5 * alpha);
  double hi = x.quantile_lower(0.5 * (1.0 + alpha));
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int attempt = 0; attempt <= search.max_widenings; ++attempt) {
    double a = lo, b = hi;
    const double g_lo = g(lo), g_hi = g(hi);
    if (a < b) {
      double c1 = b - invphi * (b - a), c2 = a + invphi * (b - a);
      double g1 = g(c1), g2 = g(c2);
      while (b - a > search.tolerance * std::max(1.0, std::fabs(a) + std::fabs(b))) {
        if (g1 <= g2) {
          b = c2;
          c2 = c1;
          g2 = g1;
          c1 = b - invphi * (b - a);
          g1 = g(c1);
        } else {
          a = c1;
          c1 = c2;
          g1 = g2;
          c2 = a + invphi * (b - a);
          g2 = g(c2);
        }
      }
    }
    if (x.is_discrete()) {
      // The objective is piecewise linear with kinks at the atoms.
      for (const auto& atom : x.atoms())
        if (atom.value >= lo && atom.value <= hi)
          g(atom.value);
    }
    // Widen when the minimum sits on the bracket and the objective keeps
    // falling beyond it.
    const double width = std::max(hi - lo, 1.0);
    const bool at_lo = best.minimizer == lo || std::fabs(best.minimizer - lo) <= search.tolerance * width;
    const bool at_hi = best.minimizer == hi || std::fabs(best.minimizer - hi) <= search.tolerance * width;
    if (at_lo && g(lo - width) < g_lo) {
      lo -= width;
      continue;
    }
    if (at_hi && g(hi + width) < g_hi) {
      hi += width;
      continue;
    }
    return best;
  }
  throw Error("expected shortfall infimum: the minimum stayed on the search bracket after " +
              std::to_string(search.max_widenings) + " widenings");
}

ExtendedRisk expected_shortfall_order_n(const Distribution& x, int n, double alpha, const RiskOptions& options) {
  return rho_quantile(x, Distortion::expected_shortfall_order(n, alpha), options);
}

ExtendedRisk rho_mixture(const Distribution& x, const Distortion& d, const RiskOptions& options) {
  const auto s = spectral_of(d);
  const auto nu = mixture_measure_of(s);
  const auto m = mean(x, options);
  Part total_pos(options), total_neg(options);

  if (x.is_discrete()) {
    // (1 - alpha) ES_alpha = (1 - alpha) x_i + SL_i for alpha in (c_{i-1}, c_i].
    const auto atoms = x.atoms();
    const auto levels = x.levels();
    std::vector<double> sl(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i)
      sl[i] = discrete_stop_loss(x, atoms[i].value);
    auto weight = [&](double a) {
      if (a == 0.0)
        return m.value;
      const auto i = static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), a) - levels.begin());
      const auto j = std::min(i, atoms.size() - 1);
      return (1.0 - a) * atoms[j].value + sl[j];
    };
    CompensatedSum sum;
    for (const auto& atom : nu.atoms)
      sum.add(atom.mass * weight(atom.u));
    for (const auto& piece : nu.density) {
      std::vector<double> cuts{piece.lo};
      for (double l : levels)
        if (l > piece.lo && l < piece.hi)
          cuts.push_back(l);
      cuts.push_back(piece.hi);
      for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        const auto i = static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), b) - levels.begin());
        const auto j = std::min(i, atoms.size() - 1);
        const double xv = atoms[j].value, slv = sl[j];
        Part part(options);
        part.regular([&](double al) { return piece.term(al) * ((1.0 - al) * xv + slv); }, a, b);
        if (part.undecided())
          throw InconclusiveError("rho (mixture representation): " + part.note());
        sum.add(part.value());
      }
    }
    return ExtendedRisk::finite(sum.value());
  }

  if (m.kind == RiskKind::NotInDomain)
    return m;
  auto weight = [&](double a) {
    const auto es = es_given_mean(x, a, m, options);
    if (es.kind == RiskKind::NotInDomain)
      throw DomainError("not in domain");
    return (1.0 - a) * es.value;
  };
  for (const auto& atom : nu.atoms) {
    if (atom.u == 0.0 && m.kind == RiskKind::NegInfinity) {
      total_neg.add(std::numeric_limits<double>::infinity());
      continue;
    }
    const double w = weight(atom.u);
    (w > 0.0 ? total_pos : total_neg).add(atom.mass * std::fabs(w));
  }
  // Inside a density piece, (1 - alpha) ES_alpha = W(anchor) + int_alpha^anchor q,
  // so only the anchor needs a stop-loss evaluation.
  std::vector<double> jumps;
  for (double b : x.breakpoints())
    for (double u : {x.cdf_left(b), x.cdf(b)})
      if (u > 1e-12 && u < 1.0 - 1e-12)
        jumps.push_back(u);
  std::sort(jumps.begin(), jumps.end());
  // Levels found by bisection may differ in the last bits.
  jumps.erase(std::unique(jumps.begin(), jumps.end(), [](double a, double b) { return b - a < 1e-12; }), jumps.end());
  const bool unbounded_below = x.tails().lower.has_value();
  double net_density = 0.0;
  for (const auto& piece : nu.density) {
    Part part(options);
    const double anchor = piece.lo + 0.5 * (piece.hi - piece.lo);
    const double w_anchor = weight(anchor);
    const QuantileIntegral q_integral(x, jumps, anchor, options);
    auto f = [&](double al) { return al < 1.0 ? piece.term(al) * (w_anchor + q_integral(al)) : 0.0; };
    const bool sing_lo = (piece.lo == 0.0 && unbounded_below) ||
                         (piece.term.exponent < 0.0 && piece.term.origin == piece.lo);
    // W has kinks where q jumps.
    std::vector<double> cuts{piece.lo};
    for (double u : jumps)
      if (u > piece.lo && u < piece.hi && u > cuts.back())
        cuts.push_back(u);
    cuts.push_back(piece.hi);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
      part.segment(f, f, cuts[k], cuts[k + 1], sing_lo && k == 0, false);
    if (part.undecided())
      throw InconclusiveError("rho (mixture representation): " + part.note());
    if (part.diverged())
      return ExtendedRisk::neg_infinity();
    net_density += part.value();
  }
  if (std::isinf(total_neg.value()))
    return ExtendedRisk::neg_infinity();
  return ExtendedRisk::finite(total_pos.value() - total_neg.value() + net_density);
}

ExtendedRisk rho(const Distribution& x, const Distortion& d, Representation r, const RiskOptions& options) {
  switch (r) {
  case Representation::Quantile: return rho_quantile(x, d, options);
  case Representation::Choquet: return rho_choquet(x, d, options);
  case Representation::Mixture: return rho_mixture(x, d, options);
  case Representation::ClosedForm:
    switch (d.kind()) {
    case DistortionKind::Expectation: return mean(x, options);
    case DistortionKind::ValueAtRisk: return ExtendedRisk::finite(value_at_risk(x, d.alpha()));
    case DistortionKind::ExpectedShortfall: return expected_shortfall(x, d.alpha(), options);
    default: throw UnsupportedError("no closed form for distortion " + d.name());
    }
  case Representation::Infimum:
    if (d.kind() != DistortionKind::ExpectedShortfall || d.alpha() == 0.0)
      throw UnsupportedError("the infimum representation applies to es(alpha) with alpha in (0,1)");
    return ExtendedRisk::finite(expected_shortfall_infimum(x, d.alpha(), {}, options).value);
  }
  throw UnsupportedError("unknown representation");
}

//------------------------------------------------------------------------------

namespace {

bool below_on(const Distortion& lower, const Distortion& upper, const std::vector<double>& grid) {
  for (double u : grid)
    if (lower(u) > upper(u) + 1e-15)
      return false;
  return true;
}

std::optional<Sandwich> find_sandwich(const Distortion& d, const std::vector<double>& grid) {
  const auto identity = Distortion::expectation();
  if (!below_on(d, identity, grid))
    return std::nullopt;
  for (int n = 1; n <= 10; ++n)
    for (int j = 1; j < 20; ++j) {
      const double alpha = j / 20.0;
      if (below_on(Distortion::expected_shortfall_order(n, alpha), d, grid))
        return Sandwich{n, alpha};
    }
  return std::nullopt;
}

} // namespace

DomainComparison compare_domains(const Distortion& d1, const Distortion& d2, double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("delta must lie in (0,1), got " + format_number(delta));
  std::vector<double> grid;
  for (int k = 0; k < 4096; ++k)
    grid.push_back(delta + (1.0 - delta) * k / 4096.0);
  for (const auto* d : {&d1, &d2})
    if (!d->is_opaque())
      for (double k : d->knots())
        if (k >= delta)
          grid.push_back(k);

  DomainComparison c;
  c.delta = delta;
  c.first_below_second = below_on(d1, d2, grid);
  c.second_below_first = below_on(d2, d1, grid);
  c.first_sandwich = find_sandwich(d1, grid);
  c.second_sandwich = find_sandwich(d2, grid);
  if (c.first_below_second && c.second_below_first)
    c.relation = DomainRelation::Equal;
  else if (c.first_sandwich && c.second_sandwich)
    c.relation = DomainRelation::EqualToExpectationDomain;
  else if (c.first_below_second)
    c.relation = DomainRelation::FirstSubsetSecond;
  else if (c.second_below_first)
    c.relation = DomainRelation::SecondSubsetFirst;
  return c;
}

} // namespace qrisk
