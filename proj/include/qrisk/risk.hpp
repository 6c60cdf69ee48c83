#pragma once

#include "qrisk/distortion.hpp"
#include "qrisk/distribution.hpp"

#include <limits>
#include <optional>
#include <string>

namespace qrisk {

enum class RiskKind {
  Finite,
  NegInfinity,
  /// The positive-part integral diverges: X lies outside the domain of rho_Q.
  NotInDomain,
};

/// Value of rho_Q in [-inf, inf), or the flag that X is not in the domain.
/// +inf is never a value.
struct ExtendedRisk {
  RiskKind kind = RiskKind::Finite;
  double value = 0.0;

  static ExtendedRisk finite(double v) { return {RiskKind::Finite, v}; }
  static ExtendedRisk neg_infinity() { return {RiskKind::NegInfinity, -std::numeric_limits<double>::infinity()}; }
  static ExtendedRisk not_in_domain() { return {RiskKind::NotInDomain, std::numeric_limits<double>::quiet_NaN()}; }
  bool is_finite() const { return kind == RiskKind::Finite; }
};

std::string to_string(const ExtendedRisk& r);

enum class Representation { Quantile, Choquet, Mixture, ClosedForm, Infimum };
const char* to_string(Representation r);

struct RiskOptions {
  /// Absolute tolerance of adaptive quadrature (unused on exact paths).
  double tolerance = 1e-9;
};

/// Integral of the lower quantile function against Q. Exact Lebesgue-Stieltjes
/// sum for discrete distributions; adaptive quadrature otherwise. Throws
/// InconclusiveError when quadrature neither converges nor diverges.
ExtendedRisk rho_quantile(const Distribution& x, const Distortion& d, const RiskOptions& options = {});

/// Tail-integral form: int_0^inf (1 - D(F)) - int_-inf^0 D(F).
ExtendedRisk rho_choquet(const Distribution& x, const Distortion& d, const RiskOptions& options = {});

/// Integral of (1 - alpha) ES_alpha against the mixture measure of spectral_of(d).
/// Throws NotSpectralError for non-convex d.
ExtendedRisk rho_mixture(const Distribution& x, const Distortion& d, const RiskOptions& options = {});

ExtendedRisk rho(const Distribution& x, const Distortion& d, Representation r, const RiskOptions& options = {});

/// Lower quantile at alpha in (0,1).
double value_at_risk(const Distribution& x, double alpha);

ExtendedRisk mean(const Distribution& x, const RiskOptions& options = {});

/// Stop-loss transform E[(X - c)^+]; NotInDomain when E[X^+] is infinite.
ExtendedRisk stop_loss(const Distribution& x, double c, const RiskOptions& options = {});

/// q + E[(X - q)^+] / (1 - alpha) with q the lower alpha-quantile; alpha = 0
/// gives the mean.
ExtendedRisk expected_shortfall(const Distribution& x, double alpha, const RiskOptions& options = {});

struct InfimumSearch {
  double tolerance = 1e-10;
  int max_widenings = 8;
};

struct InfimumResult {
  double value = 0.0;
  double minimizer = 0.0;
  int evaluations = 0;
};

/// inf_c c + E[(X - c)^+] / (1 - alpha) by golden-section search over
/// [q(alpha/2), q((1+alpha)/2)], widened when the minimum sits on the bracket.
/// Requires E[X^+] < inf.
InfimumResult expected_shortfall_infimum(const Distribution& x, double alpha, const InfimumSearch& search = {},
                                         const RiskOptions& options = {});

ExtendedRisk expected_shortfall_order_n(const Distribution& x, int n, double alpha, const RiskOptions& options = {});

enum class DomainRelation { Equal, FirstSubsetSecond, SecondSubsetFirst, EqualToExpectationDomain, Incomparable };
const char* to_string(DomainRelation r);

struct Sandwich {
  int n;
  double alpha;
};

struct DomainComparison {
  double delta = 0.0;
  bool first_below_second = false;  ///< D1 <= D2 on [delta, 1)
  bool second_below_first = false;  ///< D2 <= D1 on [delta, 1)
  /// es_n(n, alpha) <= D <= identity on [delta, 1), so the domain is L^1.
  std::optional<Sandwich> first_sandwich;
  std::optional<Sandwich> second_sandwich;
  DomainRelation relation = DomainRelation::Incomparable;
};

/// Pointwise comparison on a 4096-point grid of [delta, 1) plus the knots in
/// that range. The sandwich search covers n = 1..10, alpha = j/20.
DomainComparison compare_domains(const Distortion& d1, const Distortion& d2, double delta);

} // namespace qrisk
