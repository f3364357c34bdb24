/* C interface to the mixlab library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a mixlab_status; on failure the message is
 * available from mixlab_last_error() on the calling thread until the next call.
 * Strings returned through char** are owned by the caller and released with
 * mixlab_string_free. Configurations are passed as JSON text. */
#ifndef MIXLAB_MIXLAB_H
#define MIXLAB_MIXLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(MIXLAB_BUILDING_LIBRARY)
#define MIXLAB_API __attribute__((visibility("default")))
#else
#define MIXLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mixlab_status {
  MIXLAB_OK = 0,
  MIXLAB_ERR_SHAPE = 1,
  MIXLAB_ERR_NOT_SPD = 2,
  MIXLAB_ERR_STEP_SIZE = 3,
  MIXLAB_ERR_INVALID_WEIGHTS = 4,
  MIXLAB_ERR_INVALID_HYPERGRADIENT = 5,
  MIXLAB_ERR_BAD_GENERATOR_PARAMS = 6,
  MIXLAB_ERR_MARGIN = 7,
  MIXLAB_ERR_EMPTY_INPUT = 8,
  MIXLAB_ERR_INVALID_APPROXIMATOR = 9,
  MIXLAB_ERR_REGIME = 10,
  MIXLAB_ERR_NUMERICAL_ABORT = 11,
  MIXLAB_ERR_CONFIG = 12,
  MIXLAB_ERR_IO = 13,
  MIXLAB_ERR_NON_CONVERGENCE = 14,
  MIXLAB_ERR_DEGENERATE_FIT = 15,
  MIXLAB_ERR_NULL_ARGUMENT = 50,
  MIXLAB_ERR_INTERNAL = 99
} mixlab_status;

typedef struct mixlab_problem mixlab_problem;
typedef struct mixlab_run mixlab_run;
typedef struct mixlab_sweep mixlab_sweep;
typedef struct mixlab_quad mixlab_quad;

MIXLAB_API const char* mixlab_version(void);
MIXLAB_API const char* mixlab_last_error(void);
MIXLAB_API const char* mixlab_status_name(mixlab_status status);
MIXLAB_API void mixlab_string_free(char* s);

/* Problems. kind: "quad-1d-paper", "random-strongly-convex", "aligned-domain".
 * params_json may be NULL or "{}" for defaults (keys m, d, mu, L, spread, operating_radius). */
MIXLAB_API mixlab_status mixlab_problem_generate(const char* kind, const char* params_json, uint64_t seed,
                                                 mixlab_problem** out);
/* A problem document, or a problem source ({"kind": ...} / {"file": ...}). */
MIXLAB_API mixlab_status mixlab_problem_from_json(const char* json, mixlab_problem** out);
MIXLAB_API mixlab_status mixlab_problem_load(const char* path, mixlab_problem** out);
MIXLAB_API mixlab_status mixlab_problem_to_json(const mixlab_problem* problem, char** out_json);
MIXLAB_API mixlab_status mixlab_problem_dims(const mixlab_problem* problem, int* num_domains, int* dim);
MIXLAB_API void mixlab_problem_free(mixlab_problem* problem);

/* Hypergradients and objective at weights w (length num_domains). */
MIXLAB_API mixlab_status mixlab_outer_objective(const mixlab_problem* problem, const double* w, int m,
                                                double* out);
MIXLAB_API mixlab_status mixlab_exact_hypergrad(const mixlab_problem* problem, const double* w, int m,
                                                double* g_out);
MIXLAB_API mixlab_status mixlab_finite_diff_hypergrad(const mixlab_problem* problem, const double* w, int m,
                                                      double h, double* g_out);
MIXLAB_API mixlab_status mixlab_outer_oracle(const mixlab_problem* problem, double* w_star_out, int m,
                                             double* f_star_out);

/* Single run. config_json mirrors the run configuration (algorithm, eta, alpha,
 * T, K, N, theta0, w0, approx_mode, gamma, sigma, seed, strict_regime,
 * record_timing). When with_oracle is non-zero F* is computed for the gap columns. */
MIXLAB_API mixlab_status mixlab_run_create(const mixlab_problem* problem, const char* config_json,
                                           int with_oracle, mixlab_run** out);
MIXLAB_API mixlab_status mixlab_run_summary(const mixlab_run* run, int* rounds, double* gap_avg,
                                            double* gap_final, int* iterate_bound_violations);
MIXLAB_API mixlab_status mixlab_run_final_weights(const mixlab_run* run, double* w_out, int m);
MIXLAB_API mixlab_status mixlab_run_csv(const mixlab_run* run, char** out);
MIXLAB_API mixlab_status mixlab_run_json(const mixlab_run* run, char** out);
MIXLAB_API void mixlab_run_free(mixlab_run* run);

/* Horizon sweeps. jobs <= 0 keeps the plan's value. */
MIXLAB_API mixlab_status mixlab_sweep_run(const char* plan_json, int jobs, mixlab_sweep** out);
MIXLAB_API mixlab_status mixlab_sweep_argmin(const mixlab_sweep* sweep, long long budget, double* mean_argmin_T);
/* law: "log-N" or "sqrt-N-log-N". */
MIXLAB_API mixlab_status mixlab_sweep_fit(const mixlab_sweep* sweep, const char* law, char** report_json);
MIXLAB_API mixlab_status mixlab_sweep_csv(const mixlab_sweep* sweep, char** out);
MIXLAB_API mixlab_status mixlab_sweep_json(const mixlab_sweep* sweep, char** out);
/* Writes sweep.csv or sweep.json, the SVG plots and manifest.json into out_dir. */
MIXLAB_API mixlab_status mixlab_sweep_write(const mixlab_sweep* sweep, const char* out_dir, const char* format);
MIXLAB_API void mixlab_sweep_free(mixlab_sweep* sweep);

/* Two-domain scalar example. */
MIXLAB_API mixlab_status mixlab_quad_simulate(double R, double eta, double alpha, int T, long long N, double c,
                                              mixlab_quad** out);
MIXLAB_API mixlab_status mixlab_quad_trace_csv(const mixlab_quad* quad, char** out);
MIXLAB_API mixlab_status mixlab_quad_report_json(const mixlab_quad* quad, char** out);
/* Whether the applicable guarantee holds; both flags are 0 when not applicable. */
MIXLAB_API mixlab_status mixlab_quad_predicates(const mixlab_quad* quad, int* greedy_holds, int* recovery_holds);
MIXLAB_API void mixlab_quad_free(mixlab_quad* quad);
MIXLAB_API int mixlab_quad_recovery_horizon(double R, double eta, double c);

/* Audits. problem_json is a problem source ({"kind": ..., "m", "d", ...}); each
 * trial draws m in [2, m] and d in [1, d]. */
MIXLAB_API mixlab_status mixlab_gradcheck(const char* problem_json, int trials, double tolerance, uint64_t seed,
                                          char** report_json, int* failures);
/* config_json: {"eta", "horizons": [...], "theta0", "w", "approx_mode", "gamma"}. */
MIXLAB_API mixlab_status mixlab_decay(const mixlab_problem* problem, const char* config_json, char** report_json,
                                      char** csv);

#ifdef __cplusplus
}
#endif

#endif /* MIXLAB_MIXLAB_H */
