#pragma once

#include <stdexcept>
#include <string>

namespace qrisk {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside the range on which the object is defined
/// (probability level outside (0,1), negative tail index, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// The operation is outside the supported calculus (negative scaling, opaque
/// distortions where an exact measure is required, ...).
class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// Midpoint-convexity witness: 2 D(u) > D(u - eps) + D(u + eps).
struct MidpointWitness {
  double u = 0.0;
  double eps = 0.0;
};

/// Raised when a spectral function is requested for a non-convex distortion.
class NotSpectralError : public Error {
public:
  NotSpectralError(const std::string& what, MidpointWitness witness)
      : Error(what), witness_(witness) {}
  const MidpointWitness& witness() const noexcept { return witness_; }

private:
  MidpointWitness witness_;
};

/// Raised when a subadditivity counterexample is requested for a convex
/// distortion; none exists.
class NoCounterexampleError : public Error {
public:
  using Error::Error;
};

/// Numerical integration could neither establish convergence nor divergence.
class InconclusiveError : public Error {
public:
  using Error::Error;
};

/// Malformed input. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace qrisk
