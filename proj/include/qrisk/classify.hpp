#pragma once

#include "qrisk/distortion.hpp"
#include "qrisk/distribution.hpp"

#include <string>
#include <vector>

namespace qrisk {

/// LQ: int (q^+) dQ < inf. Acerbi: int |q| dQ < inf. Pichler: int q_{|X|} dQ < inf.
enum class DomainClass { LQ, Acerbi, Pichler };
enum class Verdict { Member, NonMember, Inconclusive };
enum class ClassifyMethod { Auto, Analytic, Probe };

const char* to_string(DomainClass c);
const char* to_string(Verdict v);
const char* to_string(ClassifyMethod m);

struct MembershipVerdict {
  DomainClass domain = DomainClass::LQ;
  Verdict verdict = Verdict::Inconclusive;
  ClassifyMethod method = ClassifyMethod::Analytic;
  /// Probe only: partial integrals over (2^-k, 1 - 2^-k), k = 1..40.
  std::vector<double> partial_integrals;
  /// Probe only: shell contributions next to 0 and next to 1.
  std::vector<double> increments_near_zero;
  std::vector<double> increments_near_one;
  std::string reason;
};

struct ProbeOptions {
  int levels = 40;
  double cauchy_tol = 1e-9;
  double growth_threshold = 1e-3;
  int growth_window = 5;
  /// Member when each side's increments shrink by at least this ratio over
  /// the window.
  double decay_ratio = 0.9;
};

/// Discrete distributions are members of every class. Otherwise Auto uses the
/// tail-exponent rule for piecewise distortions and the dyadic probe for
/// opaque ones.
MembershipVerdict classify(const Distribution& x, const Distortion& d, DomainClass domain,
                           ClassifyMethod method = ClassifyMethod::Auto, const ProbeOptions& probe = {});

} // namespace qrisk
