/*
 * eqhmm — hidden Markov model forecasting for earthquake interevent times.
 *
 * C interface to the shared library. All functions return eqh_status;
 * out-parameters are written only on EQH_OK. Handles are opaque and must be
 * released with their matching _free function. eqh_last_error() returns a
 * thread-local message describing the most recent failure.
 */

#ifndef EQHMM_H
#define EQHMM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eqh_status {
  EQH_OK = 0,
  EQH_ERR_IO = 1,       /* file missing, unreadable, or unwritable */
  EQH_ERR_PARSE = 2,    /* malformed CSV or JSON */
  EQH_ERR_INVALID = 3,  /* bad argument or configuration */
  EQH_ERR_DOMAIN = 4,   /* insufficient data, degenerate geometry, ... */
  EQH_ERR_NUMERIC = 5,  /* impossible observation, dead state, fit failure */
  EQH_ERR_NOMEM = 6,
  EQH_ERR_INTERNAL = 7
} eqh_status;

typedef struct eqh_catalog eqh_catalog;
typedef struct eqh_observations eqh_observations;
typedef struct eqh_params eqh_params;
typedef struct eqh_partition eqh_partition;
typedef struct eqh_fit_result eqh_fit_result;
typedef struct eqh_eval_result eqh_eval_result;

const char* eqh_version(void);
const char* eqh_last_error(void);
void eqh_string_free(char* s);

/* ---- catalogs ---------------------------------------------------------- */

/* Loads the catalog CSV, keeping rows with magnitude >= min_magnitude. */
eqh_status eqh_catalog_load(const char* path, double min_magnitude,
                            eqh_catalog** out);
eqh_status eqh_catalog_save(const eqh_catalog* catalog, const char* path);
void eqh_catalog_free(eqh_catalog* catalog);
size_t eqh_catalog_size(const eqh_catalog* catalog);
/* Rows that were out of time order in the input (they get sorted). */
size_t eqh_catalog_unsorted_rows(const eqh_catalog* catalog);
/* region receives 0 when the event carries no label. Any out pointer may be
 * NULL. */
eqh_status eqh_catalog_event(const eqh_catalog* catalog, size_t index,
                             double* time, double* magnitude, double* latitude,
                             double* longitude, int* region);
/* Fractional days since the catalog epoch for "YYYY-MM-DD" or
 * "YYYY-MM-DD HH:MM:SS". */
eqh_status eqh_catalog_instant(const eqh_catalog* catalog, const char* when,
                               double* out);

/* ---- region partitions ------------------------------------------------- */

/* preset: "east-west", "north-south", "quadrants", or "single". */
eqh_status eqh_partition_compute(const eqh_catalog* catalog,
                                 const char* preset, eqh_partition** out);
eqh_status eqh_partition_load(const char* path, eqh_partition** out);
eqh_status eqh_partition_save(const eqh_partition* partition, const char* path);
void eqh_partition_free(eqh_partition* partition);
/* Labels every event in place. */
eqh_status eqh_partition_assign(eqh_catalog* catalog,
                                const eqh_partition* partition);

/* ---- observations ------------------------------------------------------ */

/* use_regions nonzero keeps the catalog's region labels on the sequence
 * (required for fitting the joint model); it is an error if the catalog is
 * unlabeled. */
eqh_status eqh_observations_from_catalog(const eqh_catalog* catalog,
                                         int use_regions,
                                         eqh_observations** out);
/* regions may be NULL for a time-only sequence. */
eqh_status eqh_observations_create(const double* interevent_times,
                                   const int* regions, size_t length,
                                   eqh_observations** out);
void eqh_observations_free(eqh_observations* obs);
size_t eqh_observations_length(const eqh_observations* obs);

/* ---- model parameters -------------------------------------------------- */

/* trans is row-major n_states x n_states; region_dist is row-major
 * n_states x n_regions or NULL with n_regions == 0. */
eqh_status eqh_params_create(int n_states, const double* pi,
                             const double* trans, const double* lambda,
                             int n_regions, const double* region_dist,
                             eqh_params** out);
eqh_status eqh_params_load(const char* path, eqh_params** out);
eqh_status eqh_params_save(const eqh_params* params, const char* path);
eqh_status eqh_params_to_json(const eqh_params* params, char** out);
void eqh_params_free(eqh_params* params);
int eqh_params_n_states(const eqh_params* params);
int eqh_params_n_regions(const eqh_params* params);
/* Buffers must hold n_states, n_states^2, n_states and
 * n_states*n_regions entries; any pointer may be NULL to skip. */
eqh_status eqh_params_get(const eqh_params* params, double* pi, double* trans,
                          double* lambda, double* region_dist);
/* Canonical state order: dominant region, then ascending lambda. */
eqh_status eqh_params_sort(eqh_params* params);

/* ---- likelihood and forecasting ---------------------------------------- */

eqh_status eqh_log_likelihood(const eqh_params* params,
                              const eqh_observations* obs, double* out);
/* Next-state mixture weights just after the last event; out holds n_states
 * entries. */
eqh_status eqh_post_event_weights(const eqh_params* params,
                                  const eqh_observations* obs, double* out);
/* Survival reweighting for elapsed days since the last event. */
eqh_status eqh_scheduled_weights(const eqh_params* params, const double* base,
                                 double elapsed, double* out);
/* region 0 = whole study area; 1..R for the joint model. */
eqh_status eqh_forecast_probability(const eqh_params* params,
                                    const double* weights, double horizon_days,
                                    int region, double* out);
eqh_status eqh_forecast_density(const eqh_params* params,
                                const double* weights, double wait_days,
                                int region, double* out);
/* half_second_moment receives sum_s w_s lambda_s^2, reported next to the
 * mixture variance (they agree only for degenerate weights). */
eqh_status eqh_waiting_time_moments(const eqh_params* params,
                                    const double* weights, double* mean,
                                    double* variance,
                                    double* half_second_moment);
/* Scheduled forecast at an instant (fractional days since the catalog
 * epoch) using every prior event as history. probs holds one entry per
 * horizon; weights (optional) holds n_states entries. */
eqh_status eqh_forecast_at(const eqh_params* params,
                           const eqh_catalog* catalog, double instant,
                           const double* horizons, size_t n_horizons,
                           int region, double* probs, double* elapsed,
                           long long* history_events, double* weights);

/* ---- fitting ------------------------------------------------------------ */

/* config_json may be NULL for the default grid protocol (the two-state
 * 28-start grid; for four states with regions a two-state prefit seeds a
 * 17th start). */
eqh_status eqh_fit(const eqh_observations* obs, int n_states,
                   const char* config_json, eqh_fit_result** out);
void eqh_fit_result_free(eqh_fit_result* result);
eqh_status eqh_fit_result_params(const eqh_fit_result* result,
                                 eqh_params** out);
double eqh_fit_result_log_likelihood(const eqh_fit_result* result);
int eqh_fit_result_iterations(const eqh_fit_result* result);
int eqh_fit_result_converged(const eqh_fit_result* result);
eqh_status eqh_fit_result_to_json(const eqh_fit_result* result, char** out);
eqh_status eqh_fit_result_trace_csv(const eqh_fit_result* result, char** out);
/* The configuration the fit actually ran with, as JSON. */
eqh_status eqh_fit_result_config_json(const eqh_fit_result* result,
                                      char** out);

/* ---- simulation --------------------------------------------------------- */

/* Synthetic catalog of n_events events; epoch 2000-01-01, first event at
 * start_time days. The catalog remembers the generating state path and
 * writes it as a true_state column on save. */
eqh_status eqh_simulate(const eqh_params* params, int n_events, uint64_t seed,
                        double start_time, eqh_catalog** out);

/* ---- rolling evaluation -------------------------------------------------- */

eqh_status eqh_evaluate(const eqh_catalog* catalog, const eqh_params* params,
                        const char* eval_config_json, eqh_eval_result** out);
void eqh_eval_result_free(eqh_eval_result* result);
size_t eqh_eval_result_days(const eqh_eval_result* result);
/* Writes daily series, summaries, sorted forecasts, reliability tables and
 * tables.txt into dir; returns the newline-separated file names. */
eqh_status eqh_eval_write_outputs(const eqh_eval_result* result,
                                  const char* dir, char** files_out);
eqh_status eqh_eval_result_config_json(const eqh_eval_result* result,
                                       char** out);

#ifdef __cplusplus
}
#endif

#endif /* EQHMM_H */
