/* C interface to the qrisk library. Objects are opaque handles released with
 * the matching _free function. Every fallible call returns a qrisk_status;
 * on failure qrisk_last_error() describes the problem (per thread, valid
 * until the next failing call on that thread). Strings returned through
 * char** are heap allocated and released with qrisk_string_free. */
#ifndef QRISK_QRISK_H
#define QRISK_QRISK_H

#include <stddef.h>
#include <stdint.h>

#if defined(QRISK_BUILDING_LIBRARY)
#define QRISK_API __attribute__((visibility("default")))
#else
#define QRISK_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct qrisk_distribution qrisk_distribution;
typedef struct qrisk_distortion qrisk_distortion;

typedef enum qrisk_status {
  QRISK_OK = 0,
  QRISK_INVALID_ARGUMENT = 1,
  QRISK_PARSE = 2,
  QRISK_IO = 3,
  /* parameter outside its range */
  QRISK_DOMAIN = 4,
  /* spectral function requested for a non-convex distortion */
  QRISK_NOT_SPECTRAL = 5,
  /* counterexample requested for a convex distortion */
  QRISK_NO_COUNTEREXAMPLE = 6,
  QRISK_UNSUPPORTED = 7,
  /* quadrature neither converged nor diverged */
  QRISK_INCONCLUSIVE = 8,
  QRISK_INTERNAL = 9
} qrisk_status;

typedef enum qrisk_representation {
  QRISK_REP_QUANTILE = 0,
  QRISK_REP_CHOQUET = 1,
  QRISK_REP_MIXTURE = 2,
  QRISK_REP_CLOSED_FORM = 3,
  QRISK_REP_INFIMUM = 4
} qrisk_representation;

typedef enum qrisk_value_kind {
  QRISK_VALUE_FINITE = 0,
  QRISK_VALUE_NEG_INFINITY = 1,
  /* X is outside the domain of the risk measure */
  QRISK_VALUE_NOT_IN_DOMAIN = 2
} qrisk_value_kind;

typedef enum qrisk_domain_class { QRISK_CLASS_LQ = 0, QRISK_CLASS_ACERBI = 1, QRISK_CLASS_PICHLER = 2 } qrisk_domain_class;

typedef enum qrisk_classify_method {
  QRISK_METHOD_AUTO = 0,
  QRISK_METHOD_ANALYTIC = 1,
  QRISK_METHOD_PROBE = 2
} qrisk_classify_method;

QRISK_API const char* qrisk_version(void);
QRISK_API const char* qrisk_status_name(qrisk_status status);
QRISK_API const char* qrisk_last_error(void);
QRISK_API void qrisk_string_free(char* s);

/* Distributions */

/* Inline JSON (text starting with '{'), a .json file, or a CSV file. */
QRISK_API qrisk_status qrisk_distribution_load(const char* spec, qrisk_distribution** out);
QRISK_API qrisk_status qrisk_distribution_empirical(const double* values, size_t n, qrisk_distribution** out);
QRISK_API qrisk_status qrisk_distribution_discrete(const double* values, const double* probabilities, size_t n,
                                                   qrisk_distribution** out);
QRISK_API qrisk_status qrisk_distribution_pareto_negative(double beta, double tail_index, qrisk_distribution** out);
QRISK_API qrisk_status qrisk_distribution_comonotone_sum(const qrisk_distribution* a, const qrisk_distribution* b,
                                                         qrisk_distribution** out);
QRISK_API void qrisk_distribution_free(qrisk_distribution* x);

QRISK_API qrisk_status qrisk_distribution_cdf(const qrisk_distribution* x, double t, double* out);
QRISK_API qrisk_status qrisk_distribution_quantiles(const qrisk_distribution* x, double u, double* lower,
                                                    double* upper);
QRISK_API qrisk_status qrisk_distribution_describe(const qrisk_distribution* x, char** out);

/* Distortions */

/* Inline JSON or a path to a JSON file, e.g. {"kind":"es","alpha":0.5}. */
QRISK_API qrisk_status qrisk_distortion_load(const char* spec, qrisk_distortion** out);
QRISK_API void qrisk_distortion_free(qrisk_distortion* d);
QRISK_API qrisk_status qrisk_distortion_eval(const qrisk_distortion* d, double u, double* out);
QRISK_API qrisk_status qrisk_distortion_name(const qrisk_distortion* d, char** out);
QRISK_API qrisk_status qrisk_distortion_to_json(const qrisk_distortion* d, char** out);
/* *convex is 1 or 0; *u and *eps receive the midpoint witness when not convex
 * (any of u, eps may be NULL). */
QRISK_API qrisk_status qrisk_distortion_is_convex(const qrisk_distortion* d, int* convex, double* u, double* eps);

/* Risk values. tolerance > 0 is the quadrature tolerance. */

QRISK_API qrisk_status qrisk_rho(const qrisk_distribution* x, const qrisk_distortion* d, qrisk_representation rep,
                                 double tolerance, qrisk_value_kind* kind, double* value);
QRISK_API qrisk_status qrisk_expected_shortfall(const qrisk_distribution* x, double alpha, double tolerance,
                                                qrisk_value_kind* kind, double* value);
QRISK_API qrisk_status qrisk_value_at_risk(const qrisk_distribution* x, double alpha, double* value);

/* JSON reports (schema "qrisk.result/1"). */

QRISK_API qrisk_status qrisk_rho_json(const qrisk_distribution* x, const qrisk_distortion* d,
                                      qrisk_representation rep, double tolerance, char** out);
/* rep is QRISK_REP_CLOSED_FORM, QRISK_REP_INFIMUM or QRISK_REP_QUANTILE. */
QRISK_API qrisk_status qrisk_es_json(const qrisk_distribution* x, double alpha, qrisk_representation rep,
                                     double tolerance, char** out);
QRISK_API qrisk_status qrisk_var_json(const qrisk_distribution* x, double alpha, char** out);
QRISK_API qrisk_status qrisk_convexity_json(const qrisk_distortion* d, char** out);
QRISK_API qrisk_status qrisk_spectrum_json(const qrisk_distortion* d, char** out);
QRISK_API qrisk_status qrisk_counterexample_json(const qrisk_distortion* d, double a, char** out);
QRISK_API qrisk_status qrisk_classify_json(const qrisk_distribution* x, const qrisk_distortion* d,
                                           qrisk_domain_class domain, qrisk_classify_method method, char** out);
QRISK_API qrisk_status qrisk_compare_json(const qrisk_distortion* d1, const qrisk_distortion* d2, double delta,
                                          char** out);
QRISK_API qrisk_status qrisk_subadditivity_json(const qrisk_distortion* d, uint64_t trials, uint64_t seed,
                                                double slack, char** out);

/* Runs the property suite. config is a JSON matrix, or NULL for the default
 * matrix. tolerance > 0, trials >= 0 and seed >= 0 override the matrix
 * settings; pass 0, -1, -1 to keep them. *ok is 1 when no check failed.
 * Output schema "qrisk.suite/1". */
QRISK_API qrisk_status qrisk_suite_json(const char* config, double tolerance, int64_t trials, int64_t seed, int* ok,
                                        char** out);

#ifdef __cplusplus
}
#endif

#endif
