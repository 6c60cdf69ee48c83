#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

/// Numerical building blocks: compensated summation, adaptive Gauss-Kronrod
/// quadrature, dyadic-shell integration of improper integrals with divergence
/// detection, and monotone bisection.
namespace qrisk::numeric {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + correction_; }

private:
  double sum_ = 0.0;
  double correction_ = 0.0;
};

double compensated_sum(std::span<const double> terms) noexcept;

using Integrand = std::function<double(double)>;

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  int max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  std::size_t evaluations = 0;
};

/// Single 21-point Kronrod panel with embedded 10-point Gauss estimate.
QuadratureResult gauss_kronrod21(const Integrand& f, double a, double b);

/// Globally adaptive bisection on Gauss-Kronrod panels (QAG-style): the panel
/// with the largest error estimate is split until the total estimate meets
/// max(abs_tol, rel_tol * |I|) or the interval budget is exhausted.
QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& options = {});

enum class ShellStatus { Converged, Diverged, Undecided };

struct ShellOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-13;
  int min_levels = 6;
  /// Divergence is only declared once this many shells have been summed.
  int divergence_levels = 40;
  int max_levels = 1000;
  QuadratureOptions panel{1e-15, 1e-13, 2000};
};

struct ShellResult {
  double value = 0.0;
  double error = 0.0;
  ShellStatus status = ShellStatus::Undecided;
  /// Contribution of each dyadic shell, innermost first.
  std::vector<double> increments;
};

/// Integral of f over h in (0, width], where f may be singular or
/// non-integrable as h -> 0. Shell k covers [width 2^-k, width 2^(1-k)].
/// The shell contributions of a power-law integrand form a geometric sequence;
/// once the ratio settles below one the remainder is extrapolated. A sequence
/// whose ratio stays at or above one for five shells past
/// `divergence_levels` is declared divergent.
ShellResult integrate_shrinking(const Integrand& f, double width, const ShellOptions& options = {});

/// Integral of f over h in [0, infinity). Shell k covers
/// [width (2^k - 1), width (2^(k+1) - 1)].
ShellResult integrate_growing(const Integrand& f, double width, const ShellOptions& options = {});

/// Boundary of a monotone predicate on [lo, hi]: `holds` is true on [lo, x*]
/// (or [lo, x*)) and false above. Returns the largest probed point where it
/// held; bisects until lo and hi are adjacent doubles.
double bisect_boundary(const std::function<bool(double)>& holds, double lo, double hi);

} // namespace qrisk::numeric
