#pragma once

#include "qrisk/errors.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace qrisk {

/// coef * ((u - origin) / scale)^exponent, with 0^0 taken as 1.
struct PowerTerm {
  double coef = 0.0;
  double origin = 0.0;
  double scale = 1.0;
  double exponent = 0.0;

  double operator()(double u) const;
  PowerTerm derivative() const;
  /// Antiderivative vanishing at `origin` (exponent + 1 > 0).
  PowerTerm primitive() const;
  bool is_constant() const { return coef == 0.0 || exponent == 0.0; }
};

/// D(u) = offset + term(u) for u in [lo, hi).
struct DistortionPiece {
  double lo = 0.0;
  double hi = 1.0;
  double offset = 0.0;
  PowerTerm term;

  double operator()(double u) const { return offset + term(u); }
};

enum class DistortionKind { Expectation, ValueAtRisk, ExpectedShortfall, ExpectedShortfallOrder, Threshold, SqrtExample, Piecewise, Opaque };

/// Increasing right-continuous D: [0,1] -> [0,1] with D(0) = 0 and D(1) = 1.
///
/// Representable distortions are piecewise power functions on a partition of
/// [0,1); a jump at a knot is the difference between the next piece's value
/// and the previous piece's left limit. Opaque distortions wrap an arbitrary
/// callable and only support evaluation-based algorithms.
class Distortion {
public:
  static Distortion expectation();
  static Distortion value_at_risk(double alpha);
  static Distortion expected_shortfall(double alpha);
  static Distortion expected_shortfall_order(int n, double alpha);
  static Distortion threshold(double delta);
  /// 1/2 sqrt(u) on [0, 1/4), u on [1/4, 1].
  static Distortion sqrt_example();
  /// Pieces must tile [0,1) in order, each increasing, with non-negative jumps,
  /// D(0) = 0 and left limit 1 at u = 1 (within 1e-12).
  static Distortion piecewise(std::vector<DistortionPiece> pieces);
  static Distortion opaque(std::function<double(double)> d, std::string name);

  DistortionKind kind() const { return kind_; }
  bool is_opaque() const { return kind_ == DistortionKind::Opaque; }
  /// Parameters of the named families (alpha or delta, and n).
  double alpha() const { return alpha_; }
  int order() const { return n_; }

  double operator()(double u) const { return eval(u); }
  double eval(double u) const;
  double left_limit(double u) const;
  /// 1 - D(1 - s), accurate for small s.
  double complement(double s) const;
  /// Q((a, b]) = D(b) - D(a) for 0 <= a <= b <= 1. Inside a single linear
  /// piece the mass is computed as slope * (b - a).
  double mass(double a, double b) const;
  /// Constant slope of D on [a, b] when both ends lie in one linear (or flat)
  /// piece without a jump in between.
  std::optional<double> slope_on(double a, double b) const;
  /// Density of the absolutely continuous part; 0 at jumps.
  double density(double u) const;

  /// Throws UnsupportedError for opaque distortions.
  const std::vector<DistortionPiece>& pieces() const;
  /// Interior piece boundaries.
  std::vector<double> knots() const;
  /// Largest delta with D = 0 on [0, delta).
  double zero_up_to() const;
  /// True if Q charges every neighbourhood of 1.
  bool has_mass_near_one() const;
  /// Exponent p with Q-density ~ u^(p-1) near 0; nullopt when Q puts no mass
  /// near 0.
  std::optional<double> density_exponent_at_zero() const;

  std::string name() const { return name_; }

private:
  Distortion() = default;
  void validate() const;

  DistortionKind kind_ = DistortionKind::Piecewise;
  std::vector<DistortionPiece> pieces_;
  std::function<double(double)> opaque_;
  double alpha_ = 0.0;
  int n_ = 1;
  std::string name_;
};

const char* to_string(DistortionKind kind);

struct ConvexityReport {
  bool convex = true;
  std::optional<MidpointWitness> witness;
  /// False when the verdict comes from the midpoint grid.
  bool exact = true;
};

/// Structural test for piecewise distortions, grid midpoint test for opaque
/// ones. A non-convex verdict carries a point with 2 D(u) > D(u-eps) + D(u+eps).
ConvexityReport is_convex(const Distortion& d);
/// Midpoint test on u = k/512, eps = j/1024 with eps < min(u, 1-u).
ConvexityReport is_convex_on_grid(const Distortion& d);

struct WeightedPoint {
  double u;
  double mass;
};

struct DensityPiece {
  double lo, hi;
  PowerTerm term;
};

/// Probability measure Q on [0,1] with Q([0,u]) = D(u).
struct DistortionMeasure {
  std::vector<WeightedPoint> atoms;
  std::vector<DensityPiece> density;
  double total_mass() const;
};

DistortionMeasure measure_of(const Distortion& d);

/// Increasing, right-continuous s on (0,1) with unit integral.
class SpectralDensity {
public:
  static SpectralDensity from_pieces(std::vector<DensityPiece> pieces);
  double operator()(double u) const;
  /// Limit as u -> 0 from the right.
  double at_zero() const;
  double integral() const;
  const std::vector<DensityPiece>& pieces() const { return pieces_; }

private:
  std::vector<DensityPiece> pieces_;
};

/// s = D' for convex D; NotSpectralError with the convexity witness otherwise.
SpectralDensity spectral_of(const Distortion& d);
Distortion distortion_of(const SpectralDensity& s);

/// Measure nu on [0,1) with nu([0,u]) = s(u).
struct MixtureMeasure {
  std::vector<WeightedPoint> atoms;
  std::vector<DensityPiece> density;
  double cumulative(double u) const;
};

MixtureMeasure mixture_measure_of(const SpectralDensity& s);

} // namespace qrisk
