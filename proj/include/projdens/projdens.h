/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface to the projection density estimation library.
 *
 * Objects are opaque handles created by *_create / *_load functions and
 * released with the matching *_free. Every fallible call returns a
 * pd_status; on failure pd_last_error() describes the problem for the
 * calling thread. Handles are not synchronised: use one per thread, except
 * models, snapshots and estimates, which are immutable and may be shared.
 */
#ifndef PROJDENS_H
#define PROJDENS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PROJDENS_BUILDING_LIBRARY)
#    define PD_API __declspec(dllexport)
#  else
#    define PD_API __declspec(dllimport)
#  endif
#else
#  define PD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pd_status {
  PD_OK = 0,
  PD_ERR_DOMAIN = 1,
  PD_ERR_BOUNDS = 2,
  PD_ERR_STATE = 3,
  PD_ERR_CONFIG = 4,
  PD_ERR_SCHEMA = 5,
  PD_ERR_IO = 6,
  PD_ERR_ACCURACY = 7,
  PD_ERR_SEARCH_EXHAUSTED = 8,
  PD_ERR_MODEL = 9,
  PD_ERR_INVALID_ARGUMENT = 10, /* null handle or output pointer */
  PD_ERR_INTERNAL = 11
} pd_status;

typedef enum pd_basis_kind { PD_BASIS_COSINE = 0, PD_BASIS_TRIG = 1 } pd_basis_kind;

typedef enum pd_rho_source { PD_RHO_ORACLE = 0, PD_RHO_ADAPTIVE = 1 } pd_rho_source;

typedef struct pd_model_s *pd_model;
typedef struct pd_stream_s *pd_stream;
typedef struct pd_accumulator_s *pd_accumulator;
typedef struct pd_snapshot_s *pd_snapshot;
typedef struct pd_estimate_s *pd_estimate;
typedef struct pd_trace_s *pd_trace;

typedef struct pd_confidence_report {
  size_t N;
  uint64_t n;
  double M;
  double rho;
  double alpha;
  double t;
  double radius_sq;
  pd_rho_source rho_source;
} pd_confidence_report;

PD_API const char *pd_version(void);
/* Message for the most recent failure on this thread; "" if none. */
PD_API const char *pd_last_error(void);
PD_API const char *pd_status_name(pd_status status);

/* basis */
PD_API pd_status pd_basis_parse(const char *name, pd_basis_kind *out);
PD_API pd_status pd_basis_evaluate(pd_basis_kind kind, size_t k, double x, double *out);
PD_API pd_status pd_basis_sup_bound(pd_basis_kind kind, double *out);
/* Gauss-Legendre inner product <phi_j, phi_k>; *resolved is 0 when the panel
 * count is below 4*max(j,k). */
PD_API pd_status pd_basis_gram_entry(pd_basis_kind kind, size_t j, size_t k, size_t panels,
                                     size_t nodes_per_panel, double *value, int *resolved);

/* densities */
PD_API pd_status pd_model_from_json(const char *json, pd_model *out);
PD_API pd_status pd_model_load(const char *path, pd_model *out);
/* Replaces the model's basis kind (coefficients are kept). */
PD_API pd_status pd_model_with_basis(pd_model model, pd_basis_kind kind, pd_model *out);
PD_API void pd_model_free(pd_model model);
PD_API pd_status pd_model_basis(pd_model model, pd_basis_kind *out);
PD_API pd_status pd_model_sup_bound(pd_model model, double *out);
PD_API pd_status pd_model_coefficient(pd_model model, size_t k, double *out);
PD_API pd_status pd_model_tail_energy(pd_model model, size_t N, double *out);
PD_API pd_status pd_model_density_at(pd_model model, double x, double *out);
PD_API pd_status pd_model_envelope_bound(pd_model model, double *out);
/* Canonical JSON of the model; writes at most cap bytes including the
 * terminating NUL and stores the full length (without NUL) in *len. */
PD_API pd_status pd_model_to_json(pd_model model, char *buf, size_t cap, size_t *len);

/* sampling; the stream keeps the model alive */
PD_API pd_status pd_stream_create(pd_model model, uint64_t seed, pd_stream *out);
PD_API void pd_stream_free(pd_stream stream);
PD_API pd_status pd_stream_draw(pd_stream stream, size_t n, double *out);
PD_API uint64_t pd_derive_seed(uint64_t base, uint64_t replication);

/* coefficients */
PD_API pd_status pd_accumulator_create(pd_basis_kind kind, size_t k_max, pd_accumulator *out);
PD_API void pd_accumulator_free(pd_accumulator acc);
PD_API size_t pd_accumulator_default_k_max(uint64_t n_planned);
PD_API pd_status pd_accumulator_push(pd_accumulator acc, const double *xs, size_t count);
PD_API pd_status pd_accumulator_count(pd_accumulator acc, uint64_t *out);
PD_API pd_status pd_accumulator_snapshot(pd_accumulator acc, pd_snapshot *out);
PD_API void pd_snapshot_free(pd_snapshot snap);
PD_API pd_status pd_snapshot_count(pd_snapshot snap, uint64_t *out);
PD_API pd_status pd_snapshot_k_max(pd_snapshot snap, size_t *out);
PD_API pd_status pd_snapshot_coefficient(pd_snapshot snap, size_t k, double *out);
/* CSV: "# n=<n> basis=<kind> seed=<seed>" then "k,c_hat" rows. has_seed=0
 * omits the seed field. */
PD_API pd_status pd_snapshot_write_csv(pd_snapshot snap, const char *path, int has_seed,
                                       uint64_t seed);

/* estimator */
PD_API pd_status pd_estimate_build(pd_snapshot snap, size_t N, pd_estimate *out);
PD_API void pd_estimate_free(pd_estimate est);
PD_API pd_status pd_estimate_order(pd_estimate est, size_t *out);
PD_API pd_status pd_estimate_evaluate(pd_estimate est, double x, double *out);
/* CSV "x,f_hat" on a uniform grid of `points` abscissae; clip != 0 writes
 * max(f_hat, 0). */
PD_API pd_status pd_estimate_write_grid_csv(pd_estimate est, const char *path, size_t points,
                                            int clip);
PD_API pd_status pd_l2_error_sq(pd_estimate est, pd_model model, double *out);
PD_API pd_status pd_risk_bound(pd_model model, size_t N, uint64_t n, double *out);

/* selection; N_max / k_cap of 0 select the default min(n, 4096) */
PD_API pd_status pd_batch_optimal_order(pd_model model, uint64_t n, size_t N_max, size_t *out);
PD_API pd_status pd_optimal_risk(pd_model model, uint64_t n, double *out);
PD_API pd_status pd_threshold_order(pd_model model, uint64_t n, size_t k_cap, size_t *out);
PD_API pd_status pd_recursive_order_step(size_t Y, uint64_t n, double c_sq_at_Y, double M,
                                         size_t *out);
PD_API pd_status pd_trace_oracle(pd_model model, uint64_t n_max, pd_trace *out);
PD_API pd_status pd_trace_plugin(pd_basis_kind kind, const double *samples, size_t count,
                                 size_t k_max, pd_trace *out);
PD_API void pd_trace_free(pd_trace trace);
PD_API pd_status pd_trace_length(pd_trace trace, uint64_t *out);
PD_API pd_status pd_trace_value(pd_trace trace, uint64_t n, size_t *out);
PD_API pd_status pd_q_factor(pd_model model, pd_trace trace, uint64_t n_lo, uint64_t n_hi,
                             double *q, uint64_t *argmax_n);
/* Gamma-hat for the rule K(n) = orders[n - n_lo], n in [n_lo, n_hi]. */
PD_API pd_status pd_quasi_optimality_ratio(pd_model model, const size_t *orders, uint64_t n_lo,
                                           uint64_t n_hi, double *gamma, uint64_t *argmax_n);
PD_API pd_status pd_adaptive_statistic(pd_snapshot snap, size_t N, double *out);
/* *clipped is set to 1 when n/2 exceeded k_max/2. */
PD_API pd_status pd_adaptive_order(pd_snapshot snap, size_t *out, int *clipped);

/* confidence */
PD_API pd_status pd_deviation_statistic(pd_estimate est, pd_model model, double *out);
PD_API pd_status pd_tail_bound(double t, double M, double *out);
PD_API pd_status pd_recursive_tail_bound(double t, double M, double Q, double *out);
PD_API pd_status pd_confidence_radius(size_t N, uint64_t n, double M, double rho, double alpha,
                                      pd_rho_source source, pd_confidence_report *out);

/* `select` table as CSV (n,N0,L,Y_oracle,Y_plugin,tau_argmin,A_star,Q_running)
 * for the given n values (each >= 4); k_max 0 uses min(max n, 4096). */
PD_API pd_status pd_select_write_csv(pd_model model, const uint64_t *n_grid, size_t count,
                                     uint64_t seed, size_t k_max, const char *path);
/* Parses an n grid ("1e2:1e6:log10", "1e2:1e6:log10/2" or "100,1000").
 * Writes up to cap values and stores the total count in *count. */
PD_API pd_status pd_parse_n_grid(const char *text, uint64_t *out, size_t cap, size_t *count);

/* experiments: runs a JSON plan (text) and writes CSVs plus manifest.json to
 * out_dir. base_dir resolves a relative model_file (may be NULL). threads 0
 * uses hardware concurrency. */
PD_API pd_status pd_run_plan(const char *plan_json, const char *base_dir, const char *out_dir,
                             unsigned threads);
PD_API pd_status pd_run_plan_file(const char *path, const char *out_dir, unsigned threads);

#ifdef __cplusplus
}
#endif

#endif /* PROJDENS_H */
