#include "qrisk/distortion.hpp"

#include "format.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qrisk {

using detail::format_number;

double PowerTerm::operator()(double u) const {
  if (coef == 0.0)
    return 0.0;
  if (exponent == 0.0)
    return coef;
  const double x = (u - origin) / scale;
  if (x <= 0.0)
    return 0.0;
  if (exponent == 1.0)
    return coef * x;
  return coef * std::pow(x, exponent);
}

PowerTerm PowerTerm::derivative() const {
  if (is_constant())
    return {0.0, origin, scale, 0.0};
  return {coef * exponent / scale, origin, scale, exponent - 1.0};
}

PowerTerm PowerTerm::primitive() const {
  if (coef == 0.0)
    return {0.0, origin, scale, 0.0};
  return {coef * scale / (exponent + 1.0), origin, scale, exponent + 1.0};
}

namespace {

constexpr PowerTerm kZero{0.0, 0.0, 1.0, 0.0};
constexpr PowerTerm kIdentity{1.0, 0.0, 1.0, 1.0};

double constant_value(const PowerTerm& t) { return t.coef == 0.0 ? 0.0 : t.coef; }

bool is_zero_piece(const DistortionPiece& p) {
  return p.term.is_constant() && p.offset + constant_value(p.term) == 0.0;
}

// Index of the piece with lo <= u < hi; u in [0,1).
template <class Pieces>
std::size_t locate(const Pieces& pieces, double u) {
  const auto it = std::upper_bound(pieces.begin(), pieces.end(), u,
                                   [](double x, const auto& p) { return x < p.lo; });
  return it == pieces.begin() ? 0 : static_cast<std::size_t>(it - pieces.begin() - 1);
}

void require_alpha(double alpha, bool allow_zero, const char* what) {
  const bool ok = allow_zero ? (alpha >= 0.0 && alpha < 1.0) : (alpha > 0.0 && alpha < 1.0);
  if (!ok)
    throw DomainError(std::string(what) + " needs alpha in " + (allow_zero ? "[0,1)" : "(0,1)") + ", got " +
                      format_number(alpha));
}

} // namespace

//------------------------------------------------------------------------------

Distortion Distortion::expectation() {
  Distortion d;
  d.kind_ = DistortionKind::Expectation;
  d.pieces_ = {{0.0, 1.0, 0.0, kIdentity}};
  d.name_ = "expectation";
  return d;
}

Distortion Distortion::value_at_risk(double alpha) {
  require_alpha(alpha, false, "var");
  Distortion d;
  d.kind_ = DistortionKind::ValueAtRisk;
  d.alpha_ = alpha;
  d.pieces_ = {{0.0, alpha, 0.0, kZero}, {alpha, 1.0, 1.0, kZero}};
  d.name_ = "var(" + format_number(alpha) + ")";
  return d;
}

Distortion Distortion::expected_shortfall(double alpha) {
  require_alpha(alpha, true, "es");
  Distortion d = expected_shortfall_order(1, alpha);
  d.kind_ = DistortionKind::ExpectedShortfall;
  d.name_ = "es(" + format_number(alpha) + ")";
  return d;
}

Distortion Distortion::expected_shortfall_order(int n, double alpha) {
  require_alpha(alpha, true, "es_n");
  if (n < 1)
    throw DomainError("es_n needs an integer order n >= 1, got " + std::to_string(n));
  Distortion d;
  d.kind_ = DistortionKind::ExpectedShortfallOrder;
  d.alpha_ = alpha;
  d.n_ = n;
  const PowerTerm top{1.0, alpha, 1.0 - alpha, static_cast<double>(n)};
  if (alpha == 0.0)
    d.pieces_ = {{0.0, 1.0, 0.0, top}};
  else
    d.pieces_ = {{0.0, alpha, 0.0, kZero}, {alpha, 1.0, 0.0, top}};
  d.name_ = "es_n(" + std::to_string(n) + ", " + format_number(alpha) + ")";
  return d;
}

Distortion Distortion::threshold(double delta) {
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("threshold needs delta in (0,1), got " + format_number(delta));
  Distortion d;
  d.kind_ = DistortionKind::Threshold;
  d.alpha_ = delta;
  d.pieces_ = {{0.0, delta, 0.0, kIdentity}, {delta, 1.0, 1.0, kZero}};
  d.name_ = "threshold(" + format_number(delta) + ")";
  return d;
}

Distortion Distortion::sqrt_example() {
  Distortion d;
  d.kind_ = DistortionKind::SqrtExample;
  d.pieces_ = {{0.0, 0.25, 0.0, {0.5, 0.0, 1.0, 0.5}}, {0.25, 1.0, 0.0, kIdentity}};
  d.name_ = "sqrt_example";
  return d;
}

Distortion Distortion::piecewise(std::vector<DistortionPiece> pieces) {
  Distortion d;
  d.kind_ = DistortionKind::Piecewise;
  d.pieces_ = std::move(pieces);
  d.validate();
  d.name_ = "piecewise(" + std::to_string(d.pieces_.size()) + " pieces)";
  return d;
}

Distortion Distortion::opaque(std::function<double(double)> fn, std::string name) {
  if (!fn)
    throw DomainError("opaque distortion needs a callable");
  Distortion d;
  d.kind_ = DistortionKind::Opaque;
  d.opaque_ = std::move(fn);
  d.name_ = std::move(name);
  return d;
}

void Distortion::validate() const {
  if (pieces_.empty())
    throw DomainError("piecewise distortion needs at least one piece");
  constexpr double tol = 1e-12;
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    const std::string where = "piece " + std::to_string(i) + ": ";
    if (!(p.lo < p.hi))
      throw DomainError(where + "needs lo < hi");
    if ((i == 0 && p.lo != 0.0) || (i > 0 && p.lo != pieces_[i - 1].hi))
      throw DomainError(where + "pieces must tile [0,1) without gaps");
    if (!std::isfinite(p.offset) || !std::isfinite(p.term.coef) || !std::isfinite(p.term.origin) ||
        !std::isfinite(p.term.exponent) || !std::isfinite(p.term.scale))
      throw DomainError(where + "parameters must be finite");
    if (!(p.term.scale > 0.0))
      throw DomainError(where + "scale must be positive");
    if (p.term.coef < 0.0 || p.term.exponent < 0.0)
      throw DomainError(where + "coefficient and exponent must be non-negative (D is increasing)");
    if (!p.term.is_constant() && p.term.origin > p.lo)
      throw DomainError(where + "origin must not exceed lo");
    const double at_lo = p(p.lo), at_hi = p(p.hi);
    if (at_lo < -tol || at_hi > 1.0 + tol)
      throw DomainError(where + "values must lie in [0,1]");
    if (i > 0 && at_lo < pieces_[i - 1](p.lo) - tol)
      throw DomainError(where + "D must not jump downwards at u=" + format_number(p.lo));
  }
  if (pieces_.back().hi != 1.0)
    throw DomainError("pieces must end at u=1");
  if (std::fabs(pieces_.front()(0.0)) > tol)
    throw DomainError("D(0) must be 0");
  if (std::fabs(pieces_.back()(1.0) - 1.0) > tol)
    throw DomainError("D must approach 1 as u -> 1 (jump heights and increments sum to 1)");
}

double Distortion::eval(double u) const {
  if (u <= 0.0)
    return 0.0;
  if (u >= 1.0)
    return 1.0;
  if (is_opaque())
    return opaque_(u);
  return pieces_[locate(pieces_, u)](u);
}

double Distortion::left_limit(double u) const {
  if (u <= 0.0)
    return 0.0;
  if (u > 1.0)
    return 1.0;
  if (is_opaque())
    throw UnsupportedError("left limits are not available for opaque distortions");
  const auto it = std::lower_bound(pieces_.begin(), pieces_.end(), u,
                                   [](const DistortionPiece& p, double x) { return p.lo < x; });
  return (it == pieces_.begin() ? pieces_.front() : *(it - 1))(u);
}

double Distortion::complement(double s) const {
  if (s <= 0.0)
    return 0.0;
  if (s >= 1.0)
    return 1.0;
  const double u = 1.0 - s;
  if (is_opaque())
    return 1.0 - opaque_(u);
  const auto& p = pieces_[locate(pieces_, u)];
  if (p.term.is_constant())
    return 1.0 - (p.offset + constant_value(p.term));
  const auto& t = p.term;
  if (p.hi == 1.0 && t.origin < 1.0) {
    const double top = p.offset + t(1.0);
    if (std::fabs(top - 1.0) <= 1e-14) {
      // D(1 - s) = offset + (1 - offset)(1 - s/(1 - origin))^exponent.
      const double r = s / (1.0 - t.origin);
      if (r < 1.0)
        return (1.0 - p.offset) * -std::expm1(t.exponent * std::log1p(-r));
    }
  }
  return 1.0 - p(u);
}

std::optional<double> Distortion::slope_on(double a, double b) const {
  if (is_opaque() || !(a >= 0.0 && a <= b && b <= 1.0 && a < 1.0))
    return std::nullopt;
  const auto& p = pieces_[locate(pieces_, a)];
  if (!(b < p.hi || (b == 1.0 && p.hi == 1.0)))
    return std::nullopt;
  if (p.term.is_constant())
    return 0.0;
  if (p.term.exponent == 1.0)
    return p.term.coef / p.term.scale;
  return std::nullopt;
}

double Distortion::mass(double a, double b) const {
  if (!(a < b))
    return 0.0;
  if (const auto slope = slope_on(a, b))
    return *slope * (b - a);
  return eval(b) - eval(a);
}

double Distortion::density(double u) const {
  if (is_opaque())
    throw UnsupportedError("density is not available for opaque distortions");
  if (u <= 0.0 || u >= 1.0)
    return 0.0;
  return pieces_[locate(pieces_, u)].term.derivative()(u);
}

const std::vector<DistortionPiece>& Distortion::pieces() const {
  if (is_opaque())
    throw UnsupportedError("distortion '" + name_ + "' has no piecewise representation");
  return pieces_;
}

std::vector<double> Distortion::knots() const {
  std::vector<double> k;
  for (std::size_t i = 1; i < pieces().size(); ++i)
    k.push_back(pieces_[i].lo);
  return k;
}

double Distortion::zero_up_to() const {
  if (is_opaque())
    return 0.0;
  double delta = 0.0;
  for (const auto& p : pieces_) {
    if (!is_zero_piece(p))
      break;
    delta = p.hi;
  }
  return delta;
}

bool Distortion::has_mass_near_one() const {
  if (is_opaque())
    return true;
  return !pieces_.back().term.is_constant();
}

std::optional<double> Distortion::density_exponent_at_zero() const {
  if (zero_up_to() > 0.0)
    return std::nullopt;
  const auto& t = pieces().front().term;
  if (t.is_constant())
    return std::nullopt;
  return t.origin < 0.0 ? 1.0 : t.exponent;
}

const char* to_string(DistortionKind kind) {
  switch (kind) {
  case DistortionKind::Expectation: return "expectation";
  case DistortionKind::ValueAtRisk: return "var";
  case DistortionKind::ExpectedShortfall: return "es";
  case DistortionKind::ExpectedShortfallOrder: return "es_n";
  case DistortionKind::Threshold: return "threshold";
  case DistortionKind::SqrtExample: return "sqrt_example";
  case DistortionKind::Piecewise: return "piecewise";
  case DistortionKind::Opaque: return "opaque";
  }
  return "unknown";
}

//------------------------------------------------------------------------------
// Convexity

namespace {

bool violates(const Distortion& d, double u, double eps, double slack) {
  return 2.0 * d(u) > d(u - eps) + d(u + eps) + slack;
}

} // namespace

ConvexityReport is_convex_on_grid(const Distortion& d) {
  ConvexityReport report;
  report.exact = false;
  for (int k = 1; k < 512; ++k) {
    const double u = k / 512.0;
    for (int j = 1; j / 1024.0 < std::min(u, 1.0 - u); ++j) {
      const double eps = j / 1024.0;
      if (violates(d, u, eps, 1e-14)) {
        report.convex = false;
        report.witness = MidpointWitness{u, eps};
        return report;
      }
    }
  }
  return report;
}

ConvexityReport is_convex(const Distortion& d) {
  if (d.is_opaque())
    return is_convex_on_grid(d);

  const auto& pieces = d.pieces();
  std::vector<double> defects;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (!p.term.is_constant() && p.term.exponent < 1.0)
      defects.push_back(0.5 * (p.lo + p.hi));
    if (i == 0)
      continue;
    const auto& prev = pieces[i - 1];
    const double k = p.lo;
    if (p(k) - prev(k) > 1e-14) {
      defects.push_back(k);
      continue;
    }
    const double left = prev.term.derivative()(k);
    const double right = p.term.derivative()(k);
    if (left > right * (1.0 + 1e-12) + 1e-12)
      defects.push_back(k);
  }

  ConvexityReport report;
  if (defects.empty())
    return report;
  report.convex = false;
  std::sort(defects.begin(), defects.end());
  for (double u : defects) {
    for (double eps = 0.5 * std::min(u, 1.0 - u); eps > 1e-12; eps *= 0.5) {
      if (violates(d, u, eps, 1e-14)) {
        report.witness = MidpointWitness{u, eps};
        return report;
      }
    }
  }
  report.witness = is_convex_on_grid(d).witness;
  return report;
}

//------------------------------------------------------------------------------
// Measures and spectral densities

namespace {

double piece_integral(const DensityPiece& p, double lo, double hi) {
  const auto prim = p.term.primitive();
  return prim(hi) - prim(lo);
}

} // namespace

double DistortionMeasure::total_mass() const {
  double total = 0.0;
  for (const auto& a : atoms)
    total += a.mass;
  for (const auto& p : density)
    total += piece_integral(p, p.lo, p.hi);
  return total;
}

DistortionMeasure measure_of(const Distortion& d) {
  const auto& pieces = d.pieces();
  DistortionMeasure m;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (i > 0) {
      const double jump = p(p.lo) - pieces[i - 1](p.lo);
      if (jump > 1e-15)
        m.atoms.push_back({p.lo, jump});
    }
    if (!p.term.is_constant())
      m.density.push_back({p.lo, p.hi, p.term.derivative()});
  }
  return m;
}

SpectralDensity SpectralDensity::from_pieces(std::vector<DensityPiece> pieces) {
  if (pieces.empty())
    throw DomainError("spectral density needs at least one piece");
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    const std::string where = "spectral piece " + std::to_string(i) + ": ";
    if (!(p.lo < p.hi) || (i == 0 && p.lo != 0.0) || (i > 0 && p.lo != pieces[i - 1].hi))
      throw DomainError(where + "pieces must tile [0,1) in order");
    if (p.term.coef < 0.0 || p.term.exponent < 0.0 || !(p.term.scale > 0.0))
      throw DomainError(where + "s must be non-negative and increasing");
    if (!p.term.is_constant() && p.term.origin > p.lo)
      throw DomainError(where + "origin must not exceed lo");
    if (i > 0) {
      const double before = pieces[i - 1].term(p.lo);
      if (p.term(p.lo) < before - 1e-12 * std::max(1.0, before))
        throw DomainError(where + "s must be increasing across u=" + format_number(p.lo));
    }
  }
  if (pieces.back().hi != 1.0)
    throw DomainError("spectral pieces must end at u=1");
  SpectralDensity s;
  s.pieces_ = std::move(pieces);
  const double total = s.integral();
  if (!(std::fabs(total - 1.0) <= 1e-12))
    throw DomainError("spectral density must integrate to 1, got " + format_number(total));
  return s;
}

double SpectralDensity::operator()(double u) const {
  if (u <= 0.0)
    return at_zero();
  if (u >= 1.0)
    return pieces_.back().term(1.0);
  return pieces_[locate(pieces_, u)].term(u);
}

double SpectralDensity::at_zero() const { return pieces_.front().term(0.0); }

double SpectralDensity::integral() const {
  double total = 0.0;
  for (const auto& p : pieces_)
    total += piece_integral(p, p.lo, p.hi);
  return total;
}

SpectralDensity spectral_of(const Distortion& d) {
  if (d.is_opaque())
    throw UnsupportedError("a spectral density needs a piecewise distortion");
  const auto report = is_convex(d);
  if (!report.convex) {
    const auto w = report.witness.value_or(MidpointWitness{});
    throw NotSpectralError("distortion " + d.name() + " is not convex: 2 D(u) > D(u-eps) + D(u+eps) at u=" +
                               format_number(w.u) + ", eps=" + format_number(w.eps) +
                               "; it has no spectral density",
                           w);
  }
  std::vector<DensityPiece> pieces;
  for (const auto& p : d.pieces())
    pieces.push_back({p.lo, p.hi, p.term.is_constant() ? kZero : p.term.derivative()});
  return SpectralDensity::from_pieces(std::move(pieces));
}

Distortion distortion_of(const SpectralDensity& s) {
  std::vector<DistortionPiece> pieces;
  double level = 0.0;
  for (const auto& p : s.pieces()) {
    const auto prim = p.term.primitive();
    const double offset = level - prim(p.lo);
    pieces.push_back({p.lo, p.hi, offset, prim});
    level = offset + prim(p.hi);
  }
  return Distortion::piecewise(std::move(pieces));
}

double MixtureMeasure::cumulative(double u) const {
  double total = 0.0;
  for (const auto& a : atoms)
    if (a.u <= u)
      total += a.mass;
  for (const auto& p : density)
    if (p.lo < u)
      total += piece_integral(p, p.lo, std::min(u, p.hi));
  return total;
}

MixtureMeasure mixture_measure_of(const SpectralDensity& s) {
  MixtureMeasure nu;
  const auto& pieces = s.pieces();
  if (const double s0 = s.at_zero(); s0 > 0.0)
    nu.atoms.push_back({0.0, s0});
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (i > 0) {
      const double jump = p.term(p.lo) - pieces[i - 1].term(p.lo);
      if (jump > 1e-15)
        nu.atoms.push_back({p.lo, jump});
    }
    if (!p.term.is_constant())
      nu.density.push_back({p.lo, p.hi, p.term.derivative()});
  }
  return nu;
}

} // namespace qrisk
