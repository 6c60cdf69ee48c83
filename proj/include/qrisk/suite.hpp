#pragma once

#include "qrisk/distortion.hpp"
#include "qrisk/distribution.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qrisk {

struct NamedDistribution {
  std::string name;
  Distribution distribution;
};

struct NamedDistortion {
  std::string name;
  Distortion distortion;
};

enum class SuiteCheck { Representation, Axioms, Ordering, Domain, Subadditivity };
const char* to_string(SuiteCheck c);

struct SuiteConfig {
  std::vector<NamedDistribution> distributions;
  std::vector<NamedDistortion> distortions;
  std::vector<SuiteCheck> checks{SuiteCheck::Representation, SuiteCheck::Axioms, SuiteCheck::Ordering,
                                 SuiteCheck::Domain, SuiteCheck::Subadditivity};
  /// Quadrature tolerance passed to every risk evaluation.
  double tolerance = 1e-9;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 1;
};

/// Distributions and distortions of the acceptance matrix.
SuiteConfig default_suite_config();

/// {"distributions": [...], "distortions": [...], "checks": [...],
///  "tolerance": t, "trials": n, "seed": s}. Entries are either bare specs or
/// {"name": ..., "distribution" | "distortion": spec}. Throws ParseError with
/// "no cases" when either list is empty.
SuiteConfig parse_suite_config(const std::string& text);

enum class CheckStatus { Pass, Fail, ExpectedFailure, Skipped };
const char* to_string(CheckStatus s);

struct CheckResult {
  SuiteCheck check;
  std::string distribution; ///< empty for checks that only depend on D
  std::string distortion;
  CheckStatus status = CheckStatus::Pass;
  /// Largest deviation seen by the check (0 when not numeric).
  double max_error = 0.0;
  std::string detail;
};

struct SuiteReport {
  std::vector<CheckResult> results;
  std::size_t count(CheckStatus s) const;
  bool ok() const { return count(CheckStatus::Fail) == 0; }
};

SuiteReport run_suite(const SuiteConfig& config);

} // namespace qrisk
