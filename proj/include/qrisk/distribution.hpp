#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qrisk {

enum class DistributionKind {
  Empirical,
  DiscreteAtoms,
  ParetoNegative,
  ParetoPositive,
  Transformed,
  ComonotoneSum,
};

enum class TransformOp { Scale, Shift, PosPart, NegPart, Abs };

struct Transform {
  TransformOp op;
  double parameter = 0.0; ///< a for Scale, c for Shift, unused otherwise

  static Transform scale(double a) { return {TransformOp::Scale, a}; }
  static Transform shift(double c) { return {TransformOp::Shift, c}; }
  static Transform positive_part() { return {TransformOp::PosPart, 0.0}; }
  static Transform negative_part() { return {TransformOp::NegPart, 0.0}; }
  static Transform absolute() { return {TransformOp::Abs, 0.0}; }
};

struct Atom {
  double value;
  double probability;
};

/// Lower and upper quantile at one level.
struct QuantilePair {
  double lower;
  double upper;
};

/// Power-law behaviour of the quantile function at the ends of (0,1):
/// F<-(u) ~ -C u^(-lower) as u -> 0 and F<-(u) ~ C (1-u)^(-upper) as u -> 1.
/// An empty exponent means the quantile function stays bounded at that end.
struct TailProfile {
  std::optional<double> lower;
  std::optional<double> upper;
};

namespace detail {
class DistributionNode;
}

/// Immutable one-dimensional distribution, represented by its distribution
/// function. Copies share the underlying node; all members are const and safe
/// to call concurrently.
///
/// Discrete distributions stay discrete under every transform and under
/// comonotone addition, with cumulative probabilities tracked exactly so that
/// quantile levels are never shifted by rounding.
class Distribution {
public:
  /// Equal weights; repeated values are merged into one atom.
  static Distribution empirical(std::span<const double> values);
  /// Weighted atoms in any order; repeated values are merged. Probabilities
  /// must be positive and sum to one within 1e-12.
  static Distribution discrete(std::vector<Atom> atoms);
  /// Atoms given by strictly increasing values and their cumulative
  /// probabilities F(x_i); the last level must be 1.
  static Distribution from_levels(std::span<const double> values, std::span<const double> levels);
  static Distribution point_mass(double value);
  /// F(x) = (beta / -x)^tail_index for x < -beta, 1 otherwise.
  static Distribution pareto_negative(double beta, double tail_index = 2.0);
  /// F(x) = 1 - (scale / x)^tail_index for x >= scale, 0 otherwise.
  static Distribution pareto_positive(double tail_index, double scale);

  Distribution transformed(Transform t) const;
  Distribution scaled(double a) const { return transformed(Transform::scale(a)); }
  Distribution shifted(double c) const { return transformed(Transform::shift(c)); }
  Distribution positive_part() const { return transformed(Transform::positive_part()); }
  Distribution negative_part() const { return transformed(Transform::negative_part()); }
  Distribution absolute() const { return transformed(Transform::absolute()); }

  DistributionKind kind() const;
  bool is_discrete() const;
  /// Atoms in increasing order; empty unless is_discrete().
  std::span<const Atom> atoms() const;
  /// Cumulative probabilities F(x_i) matching atoms(); the last entry is 1.
  std::span<const double> levels() const;

  double cdf(double x) const;
  /// P[X < x].
  double cdf_left(double x) const;
  /// 1 - F(x), evaluated without cancellation in the upper tail.
  double survival(double x) const;

  /// inf{x : F(x) >= u}; throws DomainError unless 0 < u < 1.
  double quantile_lower(double u) const;
  /// sup{x : F(x) <= u}; throws DomainError unless 0 < u < 1.
  double quantile_upper(double u) const;
  QuantilePair quantiles(double u) const;
  /// quantile_lower(1 - t), accurate for small t.
  double quantile_lower_tail(double t) const;
  /// quantile_upper(1 - t), accurate for small t.
  double quantile_upper_tail(double t) const;

  TailProfile tails() const;
  /// Finite points where F jumps or its support ends; used as integration
  /// breakpoints.
  std::vector<double> breakpoints() const;
  /// A positive length scale (spread of the central quantiles).
  double scale_hint() const;

  std::string describe() const;

  friend Distribution comonotone_sum(const Distribution& a, const Distribution& b);

  explicit Distribution(std::shared_ptr<const detail::DistributionNode> node);

private:
  std::shared_ptr<const detail::DistributionNode> node_;
};

/// Distribution of X + Y for comonotone X, Y: the lower quantile functions
/// add pointwise. Exact atom merge when both inputs are discrete.
Distribution comonotone_sum(const Distribution& a, const Distribution& b);

const char* to_string(DistributionKind kind);

} // namespace qrisk
