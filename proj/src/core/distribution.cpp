#include "qrisk/distribution.hpp"

#include "qrisk/errors.hpp"
#include "qrisk/numeric.hpp"

#include "format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qrisk {

namespace detail {

class DistributionNode {
public:
  virtual ~DistributionNode() = default;
  virtual DistributionKind kind() const = 0;
  virtual double cdf(double x) const = 0;
  virtual double cdf_left(double x) const = 0;
  virtual double survival(double x) const = 0;
  virtual double q_lower(double u) const = 0;
  virtual double q_upper(double u) const = 0;
  virtual double q_lower_tail(double t) const = 0;
  virtual double q_upper_tail(double t) const = 0;
  virtual TailProfile tails() const = 0;
  virtual std::vector<double> breakpoints() const = 0;
  virtual std::string describe() const = 0;
};

} // namespace detail

namespace {

using detail::DistributionNode;
using NodePtr = std::shared_ptr<const DistributionNode>;

using detail::format_number;
std::string fmt(double v) { return format_number(v); }

//------------------------------------------------------------------------------
// Discrete

class DiscreteNode final : public DistributionNode {
public:
  DiscreteNode(std::vector<double> values, std::vector<double> levels, bool empirical,
               std::vector<double> survivals = {})
      : values_(std::move(values)), levels_(std::move(levels)), empirical_(empirical) {
    atoms_.reserve(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i)
      atoms_.push_back({values_[i], levels_[i] - (i ? levels_[i - 1] : 0.0)});
    if (survivals.size() == values_.size()) {
      survivals_ = std::move(survivals);
    } else {
      survivals_.assign(values_.size(), 0.0);
      numeric::CompensatedSum s;
      for (std::size_t i = values_.size(); i-- > 1;) {
        s.add(atoms_[i].probability);
        survivals_[i - 1] = s.value();
      }
    }
  }

  void set_probabilities(std::span<const double> probabilities) {
    for (std::size_t i = 0; i < atoms_.size(); ++i)
      atoms_[i].probability = probabilities[i];
  }

  DistributionKind kind() const override {
    return empirical_ ? DistributionKind::Empirical : DistributionKind::DiscreteAtoms;
  }

  double cdf(double x) const override {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return it == values_.begin() ? 0.0 : levels_[it - values_.begin() - 1];
  }
  double cdf_left(double x) const override {
    const auto it = std::lower_bound(values_.begin(), values_.end(), x);
    return it == values_.begin() ? 0.0 : levels_[it - values_.begin() - 1];
  }
  double survival(double x) const override {
    const auto it = std::upper_bound(values_.begin(), values_.end(), x);
    return it == values_.begin() ? 1.0 : survivals_[it - values_.begin() - 1];
  }
  double q_lower(double u) const override {
    const auto it = std::lower_bound(levels_.begin(), levels_.end(), u);
    return values_[std::min<std::size_t>(it - levels_.begin(), values_.size() - 1)];
  }
  double q_upper(double u) const override {
    const auto it = std::upper_bound(levels_.begin(), levels_.end(), u);
    return values_[std::min<std::size_t>(it - levels_.begin(), values_.size() - 1)];
  }
  // First atom whose survival is <= t (resp. < t); survivals are decreasing.
  double q_lower_tail(double t) const override {
    const auto it = std::find_if(survivals_.begin(), survivals_.end(), [t](double s) { return s <= t; });
    return values_[std::min<std::size_t>(it - survivals_.begin(), values_.size() - 1)];
  }
  double q_upper_tail(double t) const override {
    const auto it = std::find_if(survivals_.begin(), survivals_.end(), [t](double s) { return s < t; });
    return values_[std::min<std::size_t>(it - survivals_.begin(), values_.size() - 1)];
  }
  TailProfile tails() const override { return {}; }
  std::vector<double> breakpoints() const override { return values_; }
  std::string describe() const override {
    if (values_.size() == 1)
      return "point_mass(" + fmt(values_[0]) + ")";
    return std::string(empirical_ ? "empirical" : "discrete") + "(atoms=" + std::to_string(values_.size()) + ")";
  }

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& levels() const { return levels_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& survivals() const { return survivals_; }

private:
  std::vector<double> values_;
  std::vector<double> levels_;
  std::vector<Atom> atoms_;
  std::vector<double> survivals_; // 1 - F(x_i)
  bool empirical_;
};

// Merge consecutive equal values, keeping the highest level of each run.
std::shared_ptr<DiscreteNode> make_discrete_from_levels(std::vector<double> values, std::vector<double> levels,
                                                         bool empirical = false) {
  std::vector<double> v, l;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!v.empty() && v.back() == values[i]) {
      l.back() = levels[i];
      continue;
    }
    v.push_back(values[i]);
    l.push_back(levels[i]);
  }
  l.back() = 1.0;
  return std::make_shared<DiscreteNode>(std::move(v), std::move(l), empirical);
}

//------------------------------------------------------------------------------
// Pareto tails

class ParetoNegativeNode final : public DistributionNode {
public:
  ParetoNegativeNode(double beta, double theta) : beta_(beta), theta_(theta) {}
  DistributionKind kind() const override { return DistributionKind::ParetoNegative; }
  double cdf(double x) const override { return x < -beta_ ? std::pow(beta_ / -x, theta_) : 1.0; }
  double cdf_left(double x) const override { return cdf(x); }
  double survival(double x) const override {
    return x < -beta_ ? -std::expm1(theta_ * std::log(beta_ / -x)) : 0.0;
  }
  double q_lower(double u) const override { return -beta_ * std::pow(u, -1.0 / theta_); }
  double q_upper(double u) const override { return q_lower(u); }
  double q_lower_tail(double t) const override { return -beta_ * std::exp(-std::log1p(-t) / theta_); }
  double q_upper_tail(double t) const override { return q_lower_tail(t); }
  TailProfile tails() const override { return {1.0 / theta_, std::nullopt}; }
  std::vector<double> breakpoints() const override { return {-beta_}; }
  std::string describe() const override {
    return "pareto_negative(beta=" + fmt(beta_) + ", tail_index=" + fmt(theta_) + ")";
  }

private:
  double beta_, theta_;
};

class ParetoPositiveNode final : public DistributionNode {
public:
  ParetoPositiveNode(double theta, double scale) : theta_(theta), scale_(scale) {}
  DistributionKind kind() const override { return DistributionKind::ParetoPositive; }
  double cdf(double x) const override { return x < scale_ ? 0.0 : -std::expm1(theta_ * std::log(scale_ / x)); }
  double cdf_left(double x) const override { return cdf(x); }
  double survival(double x) const override { return x < scale_ ? 1.0 : std::pow(scale_ / x, theta_); }
  double q_lower(double u) const override { return scale_ * std::exp(-std::log1p(-u) / theta_); }
  double q_upper(double u) const override { return q_lower(u); }
  double q_lower_tail(double t) const override { return scale_ * std::pow(t, -1.0 / theta_); }
  double q_upper_tail(double t) const override { return q_lower_tail(t); }
  TailProfile tails() const override { return {std::nullopt, 1.0 / theta_}; }
  std::vector<double> breakpoints() const override { return {scale_}; }
  std::string describe() const override {
    return "pareto_positive(tail_index=" + fmt(theta_) + ", scale=" + fmt(scale_) + ")";
  }

private:
  double theta_, scale_;
};

//------------------------------------------------------------------------------
// Transforms of non-discrete bases (discrete bases are folded into atoms)

std::optional<double> max_exponent(std::optional<double> a, std::optional<double> b) {
  if (!a)
    return b;
  if (!b)
    return a;
  return std::max(*a, *b);
}

class TransformedNode final : public DistributionNode {
public:
  TransformedNode(NodePtr base, Transform t) : base_(std::move(base)), t_(t) {}
  DistributionKind kind() const override { return DistributionKind::Transformed; }

  double cdf(double x) const override {
    switch (t_.op) {
    case TransformOp::Scale: return base_->cdf(x / t_.parameter);
    case TransformOp::Shift: return base_->cdf(x - t_.parameter);
    case TransformOp::PosPart: return x < 0 ? 0.0 : base_->cdf(x);
    case TransformOp::NegPart: return x < 0 ? 0.0 : 1.0 - base_->cdf_left(-x);
    case TransformOp::Abs: return x < 0 ? 0.0 : base_->cdf(x) - base_->cdf_left(-x);
    }
    return 0.0;
  }
  double cdf_left(double x) const override {
    switch (t_.op) {
    case TransformOp::Scale: return base_->cdf_left(x / t_.parameter);
    case TransformOp::Shift: return base_->cdf_left(x - t_.parameter);
    case TransformOp::PosPart: return x <= 0 ? 0.0 : base_->cdf_left(x);
    case TransformOp::NegPart: return x <= 0 ? 0.0 : base_->survival(-x);
    case TransformOp::Abs: return x <= 0 ? 0.0 : base_->cdf_left(x) - base_->cdf(-x);
    }
    return 0.0;
  }
  double survival(double x) const override {
    switch (t_.op) {
    case TransformOp::Scale: return base_->survival(x / t_.parameter);
    case TransformOp::Shift: return base_->survival(x - t_.parameter);
    case TransformOp::PosPart: return x < 0 ? 1.0 : base_->survival(x);
    case TransformOp::NegPart: return x < 0 ? 1.0 : base_->cdf_left(-x);
    case TransformOp::Abs: return x < 0 ? 1.0 : base_->survival(x) + base_->cdf_left(-x);
    }
    return 0.0;
  }

  double q_lower(double u) const override {
    switch (t_.op) {
    case TransformOp::Scale: return t_.parameter * base_->q_lower(u);
    case TransformOp::Shift: return base_->q_lower(u) + t_.parameter;
    case TransformOp::PosPart: return std::max(base_->q_lower(u), 0.0);
    case TransformOp::NegPart: return std::max(-base_->q_upper_tail(u), 0.0);
    case TransformOp::Abs: return abs_lower([&](double y) { return cdf(y) >= u; });
    }
    return 0.0;
  }
  double q_upper(double u) const override {
    switch (t_.op) {
    case TransformOp::Scale: return t_.parameter * base_->q_upper(u);
    case TransformOp::Shift: return base_->q_upper(u) + t_.parameter;
    case TransformOp::PosPart: return std::max(base_->q_upper(u), 0.0);
    case TransformOp::NegPart: return std::max(-base_->q_lower_tail(u), 0.0);
    case TransformOp::Abs: return abs_upper([&](double y) { return cdf(y) <= u; });
    }
    return 0.0;
  }
  double q_lower_tail(double t) const override {
    switch (t_.op) {
    case TransformOp::Scale: return t_.parameter * base_->q_lower_tail(t);
    case TransformOp::Shift: return base_->q_lower_tail(t) + t_.parameter;
    case TransformOp::PosPart: return std::max(base_->q_lower_tail(t), 0.0);
    case TransformOp::NegPart: return std::max(-base_->q_upper(t), 0.0);
    case TransformOp::Abs: return abs_lower([&](double y) { return survival(y) <= t; });
    }
    return 0.0;
  }
  double q_upper_tail(double t) const override {
    switch (t_.op) {
    case TransformOp::Scale: return t_.parameter * base_->q_upper_tail(t);
    case TransformOp::Shift: return base_->q_upper_tail(t) + t_.parameter;
    case TransformOp::PosPart: return std::max(base_->q_upper_tail(t), 0.0);
    case TransformOp::NegPart: return std::max(-base_->q_lower(t), 0.0);
    case TransformOp::Abs: return abs_upper([&](double y) { return survival(y) >= t; });
    }
    return 0.0;
  }

  TailProfile tails() const override {
    const auto b = base_->tails();
    switch (t_.op) {
    case TransformOp::Scale:
    case TransformOp::Shift: return b;
    case TransformOp::PosPart: return {std::nullopt, b.upper};
    case TransformOp::NegPart: return {std::nullopt, b.lower};
    case TransformOp::Abs: return {std::nullopt, max_exponent(b.lower, b.upper)};
    }
    return b;
  }

  std::vector<double> breakpoints() const override {
    std::vector<double> out;
    for (double b : base_->breakpoints()) {
      switch (t_.op) {
      case TransformOp::Scale: out.push_back(b * t_.parameter); break;
      case TransformOp::Shift: out.push_back(b + t_.parameter); break;
      case TransformOp::PosPart: out.push_back(std::max(b, 0.0)); break;
      case TransformOp::NegPart: out.push_back(std::max(-b, 0.0)); break;
      case TransformOp::Abs: out.push_back(std::fabs(b)); break;
      }
    }
    if (t_.op == TransformOp::PosPart || t_.op == TransformOp::NegPart || t_.op == TransformOp::Abs)
      out.push_back(0.0);
    return out;
  }

  std::string describe() const override {
    switch (t_.op) {
    case TransformOp::Scale: return "scale(" + fmt(t_.parameter) + ", " + base_->describe() + ")";
    case TransformOp::Shift: return "shift(" + fmt(t_.parameter) + ", " + base_->describe() + ")";
    case TransformOp::PosPart: return "pos_part(" + base_->describe() + ")";
    case TransformOp::NegPart: return "neg_part(" + base_->describe() + ")";
    case TransformOp::Abs: return "abs(" + base_->describe() + ")";
    }
    return {};
  }

private:
  // |X| has no closed-form quantile; invert its distribution function.
  template <class Reached>
  static double abs_lower(Reached reached) {
    if (reached(0.0))
      return 0.0;
    double hi = 1.0;
    while (!reached(hi)) {
      hi *= 2.0;
      if (!std::isfinite(hi))
        return hi;
    }
    double lo = 0.0;
    for (;;) {
      const double mid = lo + 0.5 * (hi - lo);
      if (!(mid > lo && mid < hi))
        return hi;
      (reached(mid) ? hi : lo) = mid;
    }
  }
  template <class Within>
  static double abs_upper(Within within) {
    if (!within(0.0))
      return 0.0;
    double hi = 1.0;
    while (within(hi)) {
      hi *= 2.0;
      if (!std::isfinite(hi))
        return hi;
    }
    return numeric::bisect_boundary(within, 0.0, hi);
  }

  NodePtr base_;
  Transform t_;
};

//------------------------------------------------------------------------------
// Comonotone sum with at least one non-discrete term

class ComonotoneSumNode final : public DistributionNode {
public:
  ComonotoneSumNode(NodePtr a, NodePtr b) : a_(std::move(a)), b_(std::move(b)) {}
  DistributionKind kind() const override { return DistributionKind::ComonotoneSum; }

  // F(x) = Lebesgue measure of {u : q(u) <= x}; the lower half is resolved in
  // u, the upper half through the survival function in t = 1 - u.
  double cdf(double x) const override {
    const double f = numeric::bisect_boundary([&](double u) { return u <= 0.0 || q_lower(u) <= x; }, 0.0, 1.0);
    return f <= 0.5 ? f : 1.0 - survival(x);
  }
  double cdf_left(double x) const override {
    const double f = numeric::bisect_boundary([&](double u) { return u <= 0.0 || q_lower(u) < x; }, 0.0, 1.0);
    if (f <= 0.5)
      return f;
    return 1.0 - numeric::bisect_boundary([&](double t) { return t <= 0.0 || q_lower_tail(t) >= x; }, 0.0, 1.0);
  }
  double survival(double x) const override {
    return numeric::bisect_boundary([&](double t) { return t <= 0.0 || q_lower_tail(t) > x; }, 0.0, 1.0);
  }
  double q_lower(double u) const override { return a_->q_lower(u) + b_->q_lower(u); }
  double q_upper(double u) const override { return a_->q_upper(u) + b_->q_upper(u); }
  double q_lower_tail(double t) const override { return a_->q_lower_tail(t) + b_->q_lower_tail(t); }
  double q_upper_tail(double t) const override { return a_->q_upper_tail(t) + b_->q_upper_tail(t); }
  TailProfile tails() const override {
    const auto ta = a_->tails(), tb = b_->tails();
    return {max_exponent(ta.lower, tb.lower), max_exponent(ta.upper, tb.upper)};
  }
  // The sum's quantiles at every level where a term's quantile jumps or
  // kinks, plus the support ends.
  std::vector<double> breakpoints() const override {
    std::vector<double> levels, out;
    const auto t = tails();
    double lo = 0.0, hi = 0.0;
    for (const auto* n : {a_.get(), b_.get()}) {
      const auto bp = n->breakpoints();
      for (double b : bp)
        for (double u : {n->cdf_left(b), n->cdf(b)})
          if (u > 0.0 && u < 1.0)
            levels.push_back(u);
      if (!bp.empty()) {
        lo += *std::min_element(bp.begin(), bp.end());
        hi += *std::max_element(bp.begin(), bp.end());
      }
    }
    for (double u : levels) {
      out.push_back(q_lower(u));
      out.push_back(q_upper(u));
    }
    if (!t.lower)
      out.push_back(lo);
    if (!t.upper)
      out.push_back(hi);
    std::erase_if(out, [](double v) { return !std::isfinite(v); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  std::string describe() const override {
    return "comonotone_sum(" + a_->describe() + ", " + b_->describe() + ")";
  }

private:
  NodePtr a_, b_;
};

const DiscreteNode* as_discrete(const NodePtr& n) { return dynamic_cast<const DiscreteNode*>(n.get()); }

void check_level(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw DomainError("probability level must lie in (0,1), got " + fmt(u));
}

} // namespace

//------------------------------------------------------------------------------

Distribution::Distribution(std::shared_ptr<const detail::DistributionNode> node) : node_(std::move(node)) {}

Distribution Distribution::empirical(std::span<const double> values) {
  if (values.empty())
    throw DomainError("empirical distribution needs at least one value");
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted)
    if (!std::isfinite(v))
      throw DomainError("empirical values must be finite");
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<double> v, levels, survivals, probs;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i])
      ++j;
    v.push_back(sorted[i]);
    // k/n is correctly rounded, so equal rational levels coincide exactly.
    levels.push_back(static_cast<double>(j) / n);
    survivals.push_back(static_cast<double>(sorted.size() - j) / n);
    probs.push_back(static_cast<double>(j - i) / n);
    i = j;
  }
  auto node = std::make_shared<DiscreteNode>(std::move(v), std::move(levels), true, std::move(survivals));
  node->set_probabilities(probs);
  return Distribution(std::move(node));
}

Distribution Distribution::discrete(std::vector<Atom> atoms) {
  if (atoms.empty())
    throw DomainError("discrete distribution needs at least one atom");
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value))
      throw DomainError("atom values must be finite");
    if (!(a.probability > 0.0) || !std::isfinite(a.probability))
      throw DomainError("atom probabilities must be strictly positive, got " + fmt(a.probability));
  }
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });
  std::vector<double> values, probs;
  for (const auto& a : atoms) {
    if (!values.empty() && values.back() == a.value) {
      probs.back() += a.probability;
      continue;
    }
    values.push_back(a.value);
    probs.push_back(a.probability);
  }
  numeric::CompensatedSum total;
  std::vector<double> levels;
  for (double p : probs) {
    total.add(p);
    levels.push_back(total.value());
  }
  if (std::fabs(levels.back() - 1.0) > 1e-12)
    throw DomainError("atom probabilities sum to " + fmt(levels.back()) + ", expected 1");
  levels.back() = 1.0;
  for (std::size_t i = 0; i + 1 < levels.size(); ++i)
    levels[i] = std::min(levels[i], 1.0);
  auto node = std::make_shared<DiscreteNode>(std::move(values), std::move(levels), false);
  node->set_probabilities(probs);
  return Distribution(std::move(node));
}

Distribution Distribution::from_levels(std::span<const double> values, std::span<const double> levels) {
  if (values.empty() || values.size() != levels.size())
    throw DomainError("from_levels needs equally many values and levels");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || !std::isfinite(levels[i]))
      throw DomainError("values and levels must be finite");
    if (i > 0 && !(values[i] > values[i - 1]))
      throw DomainError("values must be strictly increasing");
    if (!(levels[i] > (i ? levels[i - 1] : 0.0)))
      throw DomainError("levels must be strictly increasing in (0,1]");
  }
  if (std::fabs(levels.back() - 1.0) > 1e-12)
    throw DomainError("last level must be 1");
  std::vector<double> l(levels.begin(), levels.end());
  l.back() = 1.0;
  return Distribution(std::make_shared<DiscreteNode>(std::vector<double>(values.begin(), values.end()), std::move(l), false));
}

Distribution Distribution::point_mass(double value) {
  const double v[1] = {value};
  const double l[1] = {1.0};
  return from_levels(v, l);
}

Distribution Distribution::pareto_negative(double beta, double tail_index) {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw DomainError("pareto_negative needs beta > 0");
  if (!(tail_index > 0.0) || !std::isfinite(tail_index))
    throw DomainError("pareto_negative needs tail_index > 0");
  return Distribution(std::make_shared<ParetoNegativeNode>(beta, tail_index));
}

Distribution Distribution::pareto_positive(double tail_index, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale))
    throw DomainError("pareto_positive needs scale > 0");
  if (!(tail_index > 0.0) || !std::isfinite(tail_index))
    throw DomainError("pareto_positive needs tail_index > 0");
  return Distribution(std::make_shared<ParetoPositiveNode>(tail_index, scale));
}

Distribution Distribution::transformed(Transform t) const {
  if (t.op == TransformOp::Scale) {
    if (!std::isfinite(t.parameter))
      throw DomainError("scale factor must be finite");
    if (t.parameter < 0.0)
      throw UnsupportedError("scaling by a negative factor is outside the quantile calculus (a >= 0 required)");
    if (t.parameter == 0.0)
      return point_mass(0.0);
    if (t.parameter == 1.0)
      return *this;
  }
  if (t.op == TransformOp::Shift) {
    if (!std::isfinite(t.parameter))
      throw DomainError("shift must be finite");
    if (t.parameter == 0.0)
      return *this;
  }

  if (const auto* d = as_discrete(node_)) {
    const auto& values = d->values();
    const auto& levels = d->levels();
    switch (t.op) {
    case TransformOp::Scale:
    case TransformOp::Shift: {
      std::vector<double> v(values);
      for (double& x : v)
        x = t.op == TransformOp::Scale ? x * t.parameter : x + t.parameter;
      return Distribution(make_discrete_from_levels(std::move(v), levels));
    }
    case TransformOp::PosPart: {
      std::vector<double> v(values);
      for (double& x : v)
        x = std::max(x, 0.0);
      return Distribution(make_discrete_from_levels(std::move(v), levels));
    }
    case TransformOp::NegPart:
    case TransformOp::Abs: {
      std::vector<Atom> atoms;
      for (const auto& a : d->atoms())
        atoms.push_back({t.op == TransformOp::Abs ? std::fabs(a.value) : std::max(-a.value, 0.0), a.probability});
      return discrete(std::move(atoms));
    }
    }
  }
  return Distribution(std::make_shared<TransformedNode>(node_, t));
}

Distribution comonotone_sum(const Distribution& a, const Distribution& b) {
  const auto* da = as_discrete(a.node_);
  const auto* db = as_discrete(b.node_);
  if (da && da->values().size() == 1)
    return b.shifted(da->values()[0]);
  if (db && db->values().size() == 1)
    return a.shifted(db->values()[0]);
  if (da && db) {
    std::vector<double> levels;
    std::merge(da->levels().begin(), da->levels().end(), db->levels().begin(), db->levels().end(),
               std::back_inserter(levels));
    // Levels closer than 1e-14 come from the same rational level rounded
    // differently; keep one of them.
    std::vector<double> merged;
    for (double l : levels)
      if (merged.empty() || l - merged.back() > 1e-14)
        merged.push_back(l);
      else
        merged.back() = std::max(merged.back(), l);
    merged.back() = 1.0;
    std::vector<double> values;
    double prev = 0.0;
    for (double l : merged) {
      // The lower quantile is constant on each (prev, l]; probe the midpoint.
      const double mid = prev + 0.5 * (l - prev);
      values.push_back(da->q_lower(mid) + db->q_lower(mid));
      prev = l;
    }
    return Distribution(make_discrete_from_levels(std::move(values), std::move(merged)));
  }
  return Distribution(std::make_shared<ComonotoneSumNode>(a.node_, b.node_));
}

DistributionKind Distribution::kind() const { return node_->kind(); }
bool Distribution::is_discrete() const { return as_discrete(node_) != nullptr; }

std::span<const Atom> Distribution::atoms() const {
  if (const auto* d = as_discrete(node_))
    return d->atoms();
  return {};
}
std::span<const double> Distribution::levels() const {
  if (const auto* d = as_discrete(node_))
    return d->levels();
  return {};
}

double Distribution::cdf(double x) const { return node_->cdf(x); }
double Distribution::cdf_left(double x) const { return node_->cdf_left(x); }
double Distribution::survival(double x) const { return node_->survival(x); }

double Distribution::quantile_lower(double u) const {
  check_level(u);
  return node_->q_lower(u);
}
double Distribution::quantile_upper(double u) const {
  check_level(u);
  return node_->q_upper(u);
}
QuantilePair Distribution::quantiles(double u) const {
  check_level(u);
  return {node_->q_lower(u), node_->q_upper(u)};
}
double Distribution::quantile_lower_tail(double t) const {
  check_level(t);
  return node_->q_lower_tail(t);
}
double Distribution::quantile_upper_tail(double t) const {
  check_level(t);
  return node_->q_upper_tail(t);
}

TailProfile Distribution::tails() const { return node_->tails(); }

std::vector<double> Distribution::breakpoints() const {
  auto b = node_->breakpoints();
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

double Distribution::scale_hint() const {
  const double spread = node_->q_upper(0.9) - node_->q_lower(0.1);
  return std::max({1.0, spread, std::fabs(node_->q_lower(0.5))});
}

std::string Distribution::describe() const { return node_->describe(); }

const char* to_string(DistributionKind kind) {
  switch (kind) {
  case DistributionKind::Empirical: return "empirical";
  case DistributionKind::DiscreteAtoms: return "discrete";
  case DistributionKind::ParetoNegative: return "pareto_negative";
  case DistributionKind::ParetoPositive: return "pareto_positive";
  case DistributionKind::Transformed: return "transformed";
  case DistributionKind::ComonotoneSum: return "comonotone_sum";
  }
  return "unknown";
}

} // namespace qrisk
