/*
 * co3 - co-clustering of ordinal data with informative censoring.
 *
 * C API over the C++ core: opaque handles, status codes, and flat
 * accessors. Every object returned through an out-parameter is owned by
 * the caller and released with the matching *_free function. Functions
 * returning const pointers expose storage owned by the handle; the
 * pointers stay valid until the handle is freed.
 *
 * On failure a function returns a nonzero status and leaves a message
 * retrievable via co3_last_error() (thread-local).
 */

#ifndef CO3_H
#define CO3_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum co3_status {
  CO3_OK = 0,
  CO3_ERR_INVALID_ARGUMENT = 1,
  CO3_ERR_IO = 2,
  CO3_ERR_PARSE = 3,
  CO3_ERR_NUMERICAL = 4
} co3_status;

const char* co3_version(void);
const char* co3_last_error(void);

/* ---- configuration ---------------------------------------------------- */

/* Flat key=value store covering model, chain, ingestion, and simulation
 * settings; unknown keys are rejected. */
typedef struct co3_options co3_options;

co3_options* co3_options_new(void);
void co3_options_free(co3_options* opt);
co3_status co3_options_load_file(co3_options* opt, const char* path);
co3_status co3_options_set(co3_options* opt, const char* key, const char* value);
/* All keys as "key=value" lines; free with co3_string_free. */
char* co3_options_dump(const co3_options* opt);
void co3_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

typedef struct co3_dataset co3_dataset;

/* y row-major with codes 1..c (ignored where delta = 0), delta 0/1. */
co3_status co3_dataset_create(int n, int p, int c, const int* y,
                              const unsigned char* delta, co3_dataset** out);
/* CSV with blank/NA fields for censored entries; honors the has_header,
 * zero_based_codes and categories options. */
co3_status co3_dataset_load_csv(const char* path, const co3_options* opt,
                                co3_dataset** out);
co3_status co3_dataset_save_csv(const co3_dataset* data, const char* path);
int co3_dataset_n(const co3_dataset* data);
int co3_dataset_p(const co3_dataset* data);
int co3_dataset_c(const co3_dataset* data);
/* 0 where censored. */
int co3_dataset_y(const co3_dataset* data, int i, int j);
int co3_dataset_observed(const co3_dataset* data, int i, int j);
void co3_dataset_free(co3_dataset* data);

/* ---- synthetic data ---------------------------------------------------- */

typedef struct co3_simulation co3_simulation;

co3_status co3_simulate(const co3_options* opt, co3_simulation** out);
const co3_dataset* co3_simulation_dataset(const co3_simulation* sim);
const int* co3_simulation_row_truth(const co3_simulation* sim);
const int* co3_simulation_col_truth(const co3_simulation* sim);
int co3_simulation_censored(const co3_simulation* sim);
int co3_simulation_requested_censored(const co3_simulation* sim);
void co3_simulation_free(co3_simulation* sim);

/* ---- fitting ----------------------------------------------------------- */

typedef struct co3_fit co3_fit;

co3_status co3_fit_run(const co3_dataset* data, const co3_options* opt, co3_fit** out);
int co3_fit_n(const co3_fit* fit);
int co3_fit_p(const co3_fit* fit);
/* Point-estimate partitions (posterior expected VI, complete linkage). */
const int* co3_fit_row_partition(const co3_fit* fit);
const int* co3_fit_col_partition(const co3_fit* fit);
/* Posterior similarity, row-major n*n / p*p. */
const double* co3_fit_row_similarity(const co3_fit* fit);
const double* co3_fit_col_similarity(const co3_fit* fit);
int co3_fit_num_draws(const co3_fit* fit);
const int* co3_fit_row_draw(const co3_fit* fit, int t);
const int* co3_fit_col_draw(const co3_fit* fit, int t);
const double* co3_fit_sigma1_trace(const co3_fit* fit);
const double* co3_fit_sigma2_trace(const co3_fit* fit);
const int* co3_fit_kn_trace(const co3_fit* fit);
const int* co3_fit_kp_trace(const co3_fit* fit);
double co3_fit_lpml(const co3_fit* fit);
void co3_fit_free(co3_fit* fit);

/* ---- latent-dimension selection ---------------------------------------- */

typedef struct co3_lpml_grid co3_lpml_grid;

co3_status co3_select_d(const co3_dataset* data, const co3_options* opt, int d_min,
                        int d_max, co3_lpml_grid** out);
int co3_lpml_grid_size(const co3_lpml_grid* grid);
int co3_lpml_grid_d(const co3_lpml_grid* grid, int idx);
double co3_lpml_grid_value(const co3_lpml_grid* grid, int idx);
int co3_lpml_grid_ok(const co3_lpml_grid* grid, int idx);
int co3_lpml_grid_best_d(const co3_lpml_grid* grid);
void co3_lpml_grid_free(co3_lpml_grid* grid);

/* ---- prior combinatorics ------------------------------------------------ */

typedef struct co3_prior_pmf co3_prior_pmf;

/* Prior pmf of the number of bivariate clusters k = k_n * k_p. */
co3_status co3_prior_k_pmf(int n, int p, double alpha1, double alpha2,
                           co3_prior_pmf** out);
int co3_prior_pmf_size(const co3_prior_pmf* pmf);
long long co3_prior_pmf_k(const co3_prior_pmf* pmf, int idx);
double co3_prior_pmf_prob(const co3_prior_pmf* pmf, int idx);
void co3_prior_pmf_free(co3_prior_pmf* pmf);
co3_status co3_expected_k(int n, int p, double alpha1, double alpha2, double* out);

/* ---- partition metrics -------------------------------------------------- */

co3_status co3_ari(const int* a, const int* b, int len, double* out);
/* ARI between the bivariate partitions of the n*p cells induced by the
 * row/column partitions. */
co3_status co3_bari(const int* rows_a, const int* cols_a, const int* rows_b,
                    const int* cols_b, int n, int p, double* out);

#ifdef __cplusplus
}
#endif

#endif /* CO3_H */
