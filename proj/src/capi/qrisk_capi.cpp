#include "qrisk/qrisk.h"

#include "qrisk/classify.hpp"
#include "qrisk/errors.hpp"
#include "qrisk/io.hpp"
#include "qrisk/properties.hpp"
#include "qrisk/risk.hpp"
#include "qrisk/suite.hpp"

#include "../core/json_io.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct qrisk_distribution {
  qrisk::Distribution value;
};

struct qrisk_distortion {
  qrisk::Distortion value;
};

namespace {

using qrisk::detail::json;

thread_local std::string last_error;

qrisk_status fail(qrisk_status s, const char* what) {
  last_error = what;
  return s;
}

// Runs f and maps library exceptions to status codes.
template <class F>
qrisk_status guard(F&& f) {
  try {
    f();
    return QRISK_OK;
  } catch (const qrisk::ParseError& e) {
    return fail(QRISK_PARSE, e.what());
  } catch (const qrisk::IoError& e) {
    return fail(QRISK_IO, e.what());
  } catch (const qrisk::NotSpectralError& e) {
    return fail(QRISK_NOT_SPECTRAL, e.what());
  } catch (const qrisk::NoCounterexampleError& e) {
    return fail(QRISK_NO_COUNTEREXAMPLE, e.what());
  } catch (const qrisk::UnsupportedError& e) {
    return fail(QRISK_UNSUPPORTED, e.what());
  } catch (const qrisk::InconclusiveError& e) {
    return fail(QRISK_INCONCLUSIVE, e.what());
  } catch (const qrisk::DomainError& e) {
    return fail(QRISK_DOMAIN, e.what());
  } catch (const json::exception& e) {
    return fail(QRISK_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(QRISK_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QRISK_INTERNAL, e.what());
  } catch (...) {
    return fail(QRISK_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p)
    throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

bool valid_tolerance(double t) { return std::isfinite(t) && t > 0.0; }

qrisk_value_kind kind_of(const qrisk::ExtendedRisk& r) {
  switch (r.kind) {
  case qrisk::RiskKind::Finite: return QRISK_VALUE_FINITE;
  case qrisk::RiskKind::NegInfinity: return QRISK_VALUE_NEG_INFINITY;
  case qrisk::RiskKind::NotInDomain: return QRISK_VALUE_NOT_IN_DOMAIN;
  }
  return QRISK_VALUE_FINITE;
}

bool representation_of(qrisk_representation rep, qrisk::Representation& out) {
  switch (rep) {
  case QRISK_REP_QUANTILE: out = qrisk::Representation::Quantile; return true;
  case QRISK_REP_CHOQUET: out = qrisk::Representation::Choquet; return true;
  case QRISK_REP_MIXTURE: out = qrisk::Representation::Mixture; return true;
  case QRISK_REP_CLOSED_FORM: out = qrisk::Representation::ClosedForm; return true;
  case QRISK_REP_INFIMUM: out = qrisk::Representation::Infimum; return true;
  }
  return false;
}

} // namespace

extern "C" {

const char* qrisk_version(void) { return "1.0.0"; }

const char* qrisk_status_name(qrisk_status status) {
  switch (status) {
  case QRISK_OK: return "ok";
  case QRISK_INVALID_ARGUMENT: return "invalid-argument";
  case QRISK_PARSE: return "parse-error";
  case QRISK_IO: return "io-error";
  case QRISK_DOMAIN: return "domain-error";
  case QRISK_NOT_SPECTRAL: return "not-spectral";
  case QRISK_NO_COUNTEREXAMPLE: return "no-counterexample";
  case QRISK_UNSUPPORTED: return "unsupported";
  case QRISK_INCONCLUSIVE: return "inconclusive";
  case QRISK_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* qrisk_last_error(void) { return last_error.c_str(); }

void qrisk_string_free(char* s) { std::free(s); }

qrisk_status qrisk_distribution_load(const char* spec, qrisk_distribution** out) {
  if (!spec || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = new qrisk_distribution{qrisk::load_distribution(spec)}; });
}

qrisk_status qrisk_distribution_empirical(const double* values, size_t n, qrisk_distribution** out) {
  if (!values || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = new qrisk_distribution{qrisk::Distribution::empirical({values, n})}; });
}

qrisk_status qrisk_distribution_discrete(const double* values, const double* probabilities, size_t n,
                                         qrisk_distribution** out) {
  if (!values || !probabilities || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    std::vector<qrisk::Atom> atoms;
    for (size_t i = 0; i < n; ++i)
      atoms.push_back({values[i], probabilities[i]});
    *out = new qrisk_distribution{qrisk::Distribution::discrete(std::move(atoms))};
  });
}

qrisk_status qrisk_distribution_pareto_negative(double beta, double tail_index, qrisk_distribution** out) {
  if (!out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = new qrisk_distribution{qrisk::Distribution::pareto_negative(beta, tail_index)}; });
}

qrisk_status qrisk_distribution_comonotone_sum(const qrisk_distribution* a, const qrisk_distribution* b,
                                               qrisk_distribution** out) {
  if (!a || !b || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = new qrisk_distribution{comonotone_sum(a->value, b->value)}; });
}

void qrisk_distribution_free(qrisk_distribution* x) { delete x; }

qrisk_status qrisk_distribution_cdf(const qrisk_distribution* x, double t, double* out) {
  if (!x || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = x->value.cdf(t); });
}

qrisk_status qrisk_distribution_quantiles(const qrisk_distribution* x, double u, double* lower, double* upper) {
  if (!x || !lower || !upper)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    const auto q = x->value.quantiles(u);
    *lower = q.lower;
    *upper = q.upper;
  });
}

qrisk_status qrisk_distribution_describe(const qrisk_distribution* x, char** out) {
  if (!x || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = dup(x->value.describe()); });
}

qrisk_status qrisk_distortion_load(const char* spec, qrisk_distortion** out) {
  if (!spec || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = new qrisk_distortion{qrisk::load_distortion(spec)}; });
}

void qrisk_distortion_free(qrisk_distortion* d) { delete d; }

qrisk_status qrisk_distortion_eval(const qrisk_distortion* d, double u, double* out) {
  if (!d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = d->value(u); });
}

qrisk_status qrisk_distortion_name(const qrisk_distortion* d, char** out) {
  if (!d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = dup(d->value.name()); });
}

qrisk_status qrisk_distortion_to_json(const qrisk_distortion* d, char** out) {
  if (!d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = dup(qrisk::distortion_to_json(d->value)); });
}

qrisk_status qrisk_distortion_is_convex(const qrisk_distortion* d, int* convex, double* u, double* eps) {
  if (!d || !convex)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    const auto r = qrisk::is_convex(d->value);
    *convex = r.convex ? 1 : 0;
    if (r.witness) {
      if (u)
        *u = r.witness->u;
      if (eps)
        *eps = r.witness->eps;
    }
  });
}

qrisk_status qrisk_rho(const qrisk_distribution* x, const qrisk_distortion* d, qrisk_representation rep,
                       double tolerance, qrisk_value_kind* kind, double* value) {
  qrisk::Representation r;
  if (!x || !d || !kind || !value)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  if (!representation_of(rep, r))
    return fail(QRISK_INVALID_ARGUMENT, "unknown representation");
  if (!valid_tolerance(tolerance))
    return fail(QRISK_INVALID_ARGUMENT, "tolerance must be positive");
  return guard([&] {
    const auto v = qrisk::rho(x->value, d->value, r, {tolerance});
    *kind = kind_of(v);
    *value = v.value;
  });
}

qrisk_status qrisk_expected_shortfall(const qrisk_distribution* x, double alpha, double tolerance,
                                      qrisk_value_kind* kind, double* value) {
  if (!x || !kind || !value)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  if (!valid_tolerance(tolerance))
    return fail(QRISK_INVALID_ARGUMENT, "tolerance must be positive");
  return guard([&] {
    const auto v = qrisk::expected_shortfall(x->value, alpha, {tolerance});
    *kind = kind_of(v);
    *value = v.value;
  });
}

qrisk_status qrisk_value_at_risk(const qrisk_distribution* x, double alpha, double* value) {
  if (!x || !value)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *value = qrisk::value_at_risk(x->value, alpha); });
}

qrisk_status qrisk_rho_json(const qrisk_distribution* x, const qrisk_distortion* d, qrisk_representation rep,
                            double tolerance, char** out) {
  qrisk::Representation r;
  if (!x || !d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  if (!representation_of(rep, r))
    return fail(QRISK_INVALID_ARGUMENT, "unknown representation");
  if (!valid_tolerance(tolerance))
    return fail(QRISK_INVALID_ARGUMENT, "tolerance must be positive");
  return guard([&] {
    const auto v = qrisk::rho(x->value, d->value, r, {tolerance});
    *out = dup(qrisk::detail::risk_record("rho", x->value, d->value.name(), v, to_string(r), tolerance).dump());
  });
}

qrisk_status qrisk_es_json(const qrisk_distribution* x, double alpha, qrisk_representation rep, double tolerance,
                           char** out) {
  if (!x || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  if (rep != QRISK_REP_CLOSED_FORM && rep != QRISK_REP_INFIMUM && rep != QRISK_REP_QUANTILE)
    return fail(QRISK_INVALID_ARGUMENT, "ES is available as closed-form, infimum or quantile");
  if (!valid_tolerance(tolerance))
    return fail(QRISK_INVALID_ARGUMENT, "tolerance must be positive");
  return guard([&] {
    const qrisk::RiskOptions o{tolerance};
    const auto d = qrisk::Distortion::expected_shortfall(alpha);
    json rec;
    if (rep == QRISK_REP_INFIMUM) {
      // The infimum form needs E[X^+] < inf; report membership as rho would.
      const auto sl = qrisk::stop_loss(x->value, 0.0, o);
      if (!sl.is_finite()) {
        rec = qrisk::detail::risk_record("es", x->value, d.name(), sl, "infimum", tolerance);
      } else {
        const auto r = qrisk::expected_shortfall_infimum(x->value, alpha, {}, o);
        rec = qrisk::detail::risk_record("es", x->value, d.name(), qrisk::ExtendedRisk::finite(r.value), "infimum",
                                         tolerance);
        rec["minimizer"] = r.minimizer;
        rec["evaluations"] = r.evaluations;
      }
    } else if (rep == QRISK_REP_QUANTILE) {
      rec = qrisk::detail::risk_record("es", x->value, d.name(), qrisk::rho_quantile(x->value, d, o), "quantile",
                                       tolerance);
    } else {
      rec = qrisk::detail::risk_record("es", x->value, d.name(), qrisk::expected_shortfall(x->value, alpha, o),
                                       "closed-form", tolerance);
    }
    rec["alpha"] = alpha;
    *out = dup(rec.dump());
  });
}

qrisk_status qrisk_var_json(const qrisk_distribution* x, double alpha, char** out) {
  if (!x || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    const auto d = qrisk::Distortion::value_at_risk(alpha);
    const auto q = x->value.quantiles(alpha);
    auto rec = qrisk::detail::risk_record("var", x->value, d.name(), qrisk::ExtendedRisk::finite(q.lower),
                                          "closed-form", 0.0);
    rec["alpha"] = alpha;
    rec["upper_quantile"] = q.upper;
    *out = dup(rec.dump());
  });
}

qrisk_status qrisk_convexity_json(const qrisk_distortion* d, char** out) {
  if (!d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = dup(qrisk::detail::convexity_json(d->value, qrisk::is_convex(d->value)).dump()); });
}

qrisk_status qrisk_spectrum_json(const qrisk_distortion* d, char** out) {
  if (!d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] { *out = dup(qrisk::detail::spectrum_json(d->value).dump()); });
}

qrisk_status qrisk_counterexample_json(const qrisk_distortion* d, double a, char** out) {
  if (!d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    auto j = qrisk::detail::counterexample_json(qrisk::build_counterexample(d->value, a));
    j["distortion"] = d->value.name();
    *out = dup(j.dump());
  });
}

qrisk_status qrisk_classify_json(const qrisk_distribution* x, const qrisk_distortion* d, qrisk_domain_class domain,
                                 qrisk_classify_method method, char** out) {
  if (!x || !d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  qrisk::DomainClass c;
  switch (domain) {
  case QRISK_CLASS_LQ: c = qrisk::DomainClass::LQ; break;
  case QRISK_CLASS_ACERBI: c = qrisk::DomainClass::Acerbi; break;
  case QRISK_CLASS_PICHLER: c = qrisk::DomainClass::Pichler; break;
  default: return fail(QRISK_INVALID_ARGUMENT, "unknown domain class");
  }
  qrisk::ClassifyMethod m;
  switch (method) {
  case QRISK_METHOD_AUTO: m = qrisk::ClassifyMethod::Auto; break;
  case QRISK_METHOD_ANALYTIC: m = qrisk::ClassifyMethod::Analytic; break;
  case QRISK_METHOD_PROBE: m = qrisk::ClassifyMethod::Probe; break;
  default: return fail(QRISK_INVALID_ARGUMENT, "unknown classify method");
  }
  return guard([&] {
    *out = dup(qrisk::detail::verdict_json(x->value, d->value, qrisk::classify(x->value, d->value, c, m)).dump());
  });
}

qrisk_status qrisk_compare_json(const qrisk_distortion* d1, const qrisk_distortion* d2, double delta, char** out) {
  if (!d1 || !d2 || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  return guard([&] {
    const auto c = qrisk::compare_domains(d1->value, d2->value, delta);
    *out = dup(qrisk::detail::comparison_json(d1->value, d2->value, c).dump());
  });
}

qrisk_status qrisk_subadditivity_json(const qrisk_distortion* d, uint64_t trials, uint64_t seed, double slack,
                                      char** out) {
  if (!d || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  if (!(slack >= 0.0) || !std::isfinite(slack))
    return fail(QRISK_INVALID_ARGUMENT, "slack must be finite and non-negative");
  return guard([&] {
    qrisk::SearchOptions o;
    o.trials = trials;
    o.seed = seed;
    o.slack = slack;
    *out = dup(qrisk::detail::search_json(d->value, o, qrisk::subadditivity_search(d->value, o)).dump());
  });
}

qrisk_status qrisk_suite_json(const char* config, double tolerance, int64_t trials, int64_t seed, int* ok,
                              char** out) {
  if (!ok || !out)
    return fail(QRISK_INVALID_ARGUMENT, "null argument");
  if (tolerance != 0.0 && !valid_tolerance(tolerance))
    return fail(QRISK_INVALID_ARGUMENT, "tolerance must be positive");
  return guard([&] {
    auto c = config ? qrisk::parse_suite_config(config) : qrisk::default_suite_config();
    if (tolerance > 0.0)
      c.tolerance = tolerance;
    if (trials >= 0)
      c.trials = static_cast<std::uint64_t>(trials);
    if (seed >= 0)
      c.seed = static_cast<std::uint64_t>(seed);
    const auto report = qrisk::run_suite(c);
    *ok = report.ok() ? 1 : 0;
    *out = dup(qrisk::detail::suite_json(report).dump());
  });
}

} // extern "C"
