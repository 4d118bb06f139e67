/* softpou — softmax partition-of-unity function approximation and its exact
 * two-block attention-network realization.
 *
 * C interface of the shared library: opaque handles, integer status codes,
 * JSON strings for structured data. Every function returns SOFTPOU_OK on
 * success; on failure softpou_last_error() describes what went wrong (the
 * message is thread-local). Strings returned through char** are owned by the
 * caller and must be released with softpou_string_free().
 */
#ifndef SOFTPOU_H
#define SOFTPOU_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum softpou_status {
    SOFTPOU_OK = 0,
    SOFTPOU_ERR_INVALID_ARGUMENT = 1, /* bad handle, shape, or name */
    SOFTPOU_ERR_PRECONDITION = 2,     /* admissibility/margin requirement violated */
    SOFTPOU_ERR_CHECK_FAILED = 3,     /* a verification suite reported failures */
    SOFTPOU_ERR_IO = 4,
    SOFTPOU_ERR_INTERNAL = 5
} softpou_status;

typedef struct softpou_target softpou_target; /* target function + certificate */
typedef struct softpou_pou softpou_pou;       /* reference softmax-POU estimator */
typedef struct softpou_net softpou_net;       /* assembled network + metadata */

const char* softpou_version(void);

/* Thread-local message for the most recent failure in this thread. */
const char* softpou_last_error(void);

void softpou_string_free(char* s);

/* Worker threads for scans and sweeps; n <= 0 restores the default. */
void softpou_set_threads(int n);

/* ------------------------------------------------------------------ targets */

/* name: sin1d | quad2d | circle_angle | sphere_zonal */
softpou_status softpou_target_builtin(const char* name, softpou_target** out);

/* Lookup-table target. JSON: {domain, alpha, C_H, B, points, values, name?}.
 * The declared smoothness certificate is spot-checked on random pairs. */
softpou_status softpou_target_custom(const char* json_text, softpou_target** out);

/* {name, alpha, C_H, B, domain} */
softpou_status softpou_target_info(const softpou_target* target, char** json_out);

void softpou_target_free(softpou_target* target);

/* ---------------------------------------------------------- POU estimator */

/* mode: 0 = theoretical (closed-form scale), 1 = calibrated (bisected). */
softpou_status softpou_pou_build(const softpou_target* target, double epsilon, int mode,
                                 softpou_pou** out);

softpou_status softpou_pou_eval(const softpou_pou* pou, const double* x, size_t dim,
                                double* out);

/* Writes count weights; weights_len must equal the center count. */
softpou_status softpou_pou_weights(const softpou_pou* pou, const double* x, size_t dim,
                                   double* weights, size_t weights_len);

softpou_status softpou_pou_count(const softpou_pou* pou, size_t* out);

softpou_status softpou_pou_sup_error(const softpou_pou* pou, const softpou_target* target,
                                     size_t n_samples, uint64_t seed, double* out);

/* {covering: {kind, radius, count, centers}, values, M_g} */
softpou_status softpou_pou_to_json(const softpou_pou* pou, char** json_out);

void softpou_pou_free(softpou_pou* pou);

/* ------------------------------------------------------------ constructions */

softpou_status softpou_assemble(const softpou_target* target, double epsilon, int mode,
                                softpou_net** out);

softpou_status softpou_net_forward(const softpou_net* net, const double* x, size_t dim,
                                   double* out);

softpou_status softpou_net_param_count(const softpou_net* net, size_t* out);

softpou_status softpou_net_max_magnitude(const softpou_net* net, double* out);

/* Full weight set: {dims: {d, D, P, L}, embedding, positional, blocks,
 * readout}; tensors as nested row-major arrays. Round-trips bit-exactly. */
softpou_status softpou_net_params_json(const softpou_net* net, char** json_out);

/* {epsilon, P, M_g, M, c, eta, lambda, bounds, constants, pou, ...} */
softpou_status softpou_net_meta_json(const softpou_net* net, char** json_out);

/* Rebuilds a handle from the two JSON documents written by the functions
 * above; every shape invariant is re-validated. */
softpou_status softpou_net_from_json(const char* params_json, const char* meta_json,
                                     softpou_net** out);

/* Activation trace at one input as JSON; include_attention also stores the
 * per-head attention matrices. */
softpou_status softpou_net_trace_json(const softpou_net* net, const double* x, size_t dim,
                                      int include_attention, char** json_out);

void softpou_net_free(softpou_net* net);

/* ------------------------------------------------------------------- suites */

/* Identity/bound suite. target may be NULL (skips error-scan checks).
 * Returns SOFTPOU_OK with all checks passing, SOFTPOU_ERR_CHECK_FAILED when
 * any fails; report JSON: {checks: [{name, measured, limit, pass}], pass}. */
softpou_status softpou_run_verify(const softpou_net* net, const softpou_target* target,
                                  uint64_t seed, char** report_json);

/* End-to-end build + report: {epsilon, checks, pou_sup_error, net_sup_error,
 * param_count, max_magnitude, pass}. net_out may be NULL. */
softpou_status softpou_run_approx(const softpou_target* target, double epsilon, int mode,
                                  uint64_t seed, char** report_json, softpou_net** net_out);

/* Center-count scaling sweep. eps_list decreasing, length >= 4. Report:
 * {points: [{x, count, sup_error, n_total}], slope, r2, expected_slope,
 * tolerance, pass}. */
softpou_status softpou_run_rates(const softpou_target* target, const double* eps_list,
                                 size_t n_eps, int mode, double tolerance,
                                 char** report_json);

/* Plug-in regression-rate proxy. n_list >= 4 entries, each >= 50. */
softpou_status softpou_run_generalize(const softpou_target* target, double noise_sd,
                                      const uint64_t* n_list, size_t n_count, uint64_t seed,
                                      double tolerance, char** report_json);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SOFTPOU_H */
