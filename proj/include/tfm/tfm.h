#ifndef TFM_TFM_H
#define TFM_TFM_H

/*
 * C interface to the tfm library: estimation of tensor factor models for
 * tensor-valued time series by lagged moment methods (TOPUP / TIPUP / UP)
 * and their iterative projection refinements, plus a matching simulator
 * and Monte Carlo benchmark driver.
 *
 * Conventions:
 *   - every fallible function returns tfm_status; on failure a thread-local
 *     message is available from tfm_last_error() until the next failing
 *     call on the same thread;
 *   - objects are opaque handles created and destroyed in pairs; _free is
 *     always safe on NULL;
 *   - modes are 0-based; tensor entries are flat with the first index
 *     varying fastest (the column-major generalization), and matrices move
 *     through double buffers in column-major order;
 *   - output buffers are caller-allocated; capacities are in doubles.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TFM_API __declspec(dllexport)
#else
#define TFM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define TFM_MAX_ORDER 8

typedef enum tfm_status {
  TFM_OK = 0,
  TFM_ERR_INVALID_ARGUMENT = 1,
  TFM_ERR_DIMENSION_MISMATCH = 2,
  TFM_ERR_DEGENERATE_MOMENT = 3,
  TFM_ERR_IO = 4,
  TFM_ERR_INTERNAL = 5
} tfm_status;

typedef enum tfm_flavor {
  TFM_FLAVOR_TOPUP = 0,
  TFM_FLAVOR_TIPUP = 1,
  TFM_FLAVOR_UP = 2
} tfm_flavor;

/* How the r_k-th singular value of a lag-pooled moment becomes a squared
 * signal strength: divided by h0 (the default) or by sqrt(h0). */
typedef enum tfm_normalization {
  TFM_NORM_LAG_MEAN = 0,
  TFM_NORM_LAG_SQRT = 1
} tfm_normalization;

typedef struct tfm_series tfm_series;   /* tensor-valued time series */
typedef struct tfm_spec tfm_spec;       /* simulation model description */
typedef struct tfm_truth tfm_truth;     /* simulated series plus ground truth */
typedef struct tfm_result tfm_result;   /* estimation output */

TFM_API const char* tfm_version(void);

/* Message for the most recent failure on this thread ("" if none yet). */
TFM_API const char* tfm_last_error(void);

/* ------------------------------------------------------------------ */
/* Series                                                              */
/* ------------------------------------------------------------------ */

/* A zero-filled series of `length` (>= 2) tensors of the given shape. */
TFM_API tfm_status tfm_series_create(int32_t order, const int64_t* dims,
                                     int64_t length, tfm_series** out);

TFM_API tfm_status tfm_series_info(const tfm_series* series, int32_t* order,
                                   int64_t dims[TFM_MAX_ORDER],
                                   int64_t* length);

/* Copies the flat entries of observation t out of / into the series; n must
 * equal the tensor size (product of extents). */
TFM_API tfm_status tfm_series_get(const tfm_series* series, int64_t t,
                                  double* data, int64_t n);
TFM_API tfm_status tfm_series_set(tfm_series* series, int64_t t,
                                  const double* data, int64_t n);

/* Container I/O; a path ending in ".csv" selects the text form, anything
 * else the binary form. */
TFM_API tfm_status tfm_series_read(const char* path, tfm_series** out);
TFM_API tfm_status tfm_series_write(const tfm_series* series,
                                    const char* path);

TFM_API void tfm_series_free(tfm_series* series);

/* ------------------------------------------------------------------ */
/* Simulation                                                          */
/* ------------------------------------------------------------------ */

/* A model with the given shape and ranks; AR coefficients default to 0.8
 * for every factor entry, noise to equicorrelation 0.2 at scale 1. */
TFM_API tfm_status tfm_spec_create(int32_t order, const int64_t* dims,
                                   const int64_t* ranks, tfm_spec** out);

/* One of the stock settings "I", "II", "III" (16 x 16 grids). */
TFM_API tfm_status tfm_spec_preset(const char* setting, tfm_spec** out);

TFM_API tfm_status tfm_spec_set_lambda(tfm_spec* spec, double lambda);
/* n == 1 broadcasts over all factor entries. */
TFM_API tfm_status tfm_spec_set_ar(tfm_spec* spec, const double* phis,
                                   int64_t n);
/* n == 1 broadcasts over modes; sigma < 0 keeps the current scale. */
TFM_API tfm_status tfm_spec_set_noise(tfm_spec* spec, const double* rhos,
                                      int64_t n, double sigma);
TFM_API tfm_status tfm_spec_set_seed(tfm_spec* spec, uint64_t seed);
TFM_API tfm_status tfm_spec_set_burn_in(tfm_spec* spec, int32_t burn_in);
TFM_API void tfm_spec_free(tfm_spec* spec);

TFM_API tfm_status tfm_generate(const tfm_spec* spec, int64_t length,
                                tfm_truth** out);

typedef enum tfm_truth_part {
  TFM_TRUTH_OBSERVED = 0,
  TFM_TRUTH_SIGNAL = 1,
  TFM_TRUTH_NOISE = 2,
  TFM_TRUTH_FACTORS = 3
} tfm_truth_part;

/* Copies one component out as a fresh series handle owned by the caller. */
TFM_API tfm_status tfm_truth_series(const tfm_truth* truth,
                                    tfm_truth_part part, tfm_series** out);

/* True loading of one mode as a column-major d_k x r_k buffer; capacity is
 * checked against d_k * r_k, and the extents are reported back. */
TFM_API tfm_status tfm_truth_loading(const tfm_truth* truth, int32_t mode,
                                     double* colmajor, int64_t capacity,
                                     int64_t* d, int64_t* r);
TFM_API void tfm_truth_free(tfm_truth* truth);

/* Exact population signal strengths (one per mode) for the spec's factor
 * process; rejects TFM_FLAVOR_UP, which has no lagged population analogue. */
TFM_API tfm_status tfm_population_signal(const tfm_spec* spec, int32_t h0,
                                         tfm_flavor flavor,
                                         tfm_normalization norm,
                                         double* out_per_mode);

/* ------------------------------------------------------------------ */
/* Estimation                                                          */
/* ------------------------------------------------------------------ */

typedef struct tfm_estimate_options {
  int64_t ranks[TFM_MAX_ORDER]; /* one per series mode */
  int32_t h0_init;              /* lags pooled by the initializer */
  int32_t h0_iter;              /* lags pooled inside sweeps */
  tfm_flavor uinit;
  tfm_flavor uiter;
  int32_t max_sweeps;           /* 0 = init only, -1 = size-based cap */
  double epsilon;               /* sweep-to-sweep movement tolerance */
  int32_t record_trajectory;    /* nonzero to keep per-sweep movements */
} tfm_estimate_options;

/* Fills defaults: TOPUP init and sweeps, h0 = 1, automatic sweep cap,
 * epsilon = 1e-4; ranks must still be set by the caller. */
TFM_API tfm_status tfm_estimate_options_init(tfm_estimate_options* options);

/* Overwrites the flavor/sweep fields from a named preset (UP, 1UP, iUP,
 * TOPUP, 1TOPUP, iTOPUP, TIPUP, 1TIPUP, iTIPUP, TIPUP-1TOPUP, TIPUP-iTOPUP,
 * TOPUP-1TIPUP, TOPUP-iTIPUP); ranks and h0 are left untouched. */
TFM_API tfm_status tfm_method_preset(const char* name,
                                     tfm_estimate_options* options);

TFM_API tfm_status tfm_estimate(const tfm_series* series,
                                const tfm_estimate_options* options,
                                tfm_result** out);

/* Final loading of one mode, column-major d_k x r_k. */
TFM_API tfm_status tfm_result_loading(const tfm_result* result, int32_t mode,
                                      double* colmajor, int64_t capacity,
                                      int64_t* d, int64_t* r);

/* Estimated factor series / residual series as fresh handles. */
TFM_API tfm_status tfm_result_factors(const tfm_result* result,
                                      tfm_series** out);
TFM_API tfm_status tfm_result_residuals(const tfm_result* result,
                                        tfm_series** out);

TFM_API tfm_status tfm_result_info(const tfm_result* result,
                                   int32_t* sweeps_used, int32_t* converged);

/* Signal diagnostics at the final loadings (divide-by-h0 normalization):
 * per-mode squared strengths from the TOPUP and TIPUP views. */
TFM_API tfm_status tfm_result_signal(const tfm_result* result,
                                     double* lambda_sq,
                                     double* lambda_star_sq);

TFM_API void tfm_result_free(tfm_result* result);

/* ------------------------------------------------------------------ */
/* Diagnostics and benchmarking                                        */
/* ------------------------------------------------------------------ */

/* Signal strengths read directly from a series (no estimation). */
TFM_API tfm_status tfm_signal_strength(const tfm_series* series,
                                       const int64_t* ranks, int32_t h0,
                                       tfm_normalization norm,
                                       double* lambda_sq,
                                       double* lambda_star_sq);

/* Projection distance between the column spaces of two column-major d x r
 * orthonormal matrices (the sine of the largest principal angle). */
TFM_API tfm_status tfm_subspace_distance(int64_t d, int64_t r,
                                         const double* a, const double* b,
                                         double* out);

/* Runs a benchmark config (see the config-file documentation) and writes
 * the records CSV; summary_path may be NULL to skip the summary table. */
TFM_API tfm_status tfm_bench_run_file(const char* config_path,
                                      const char* records_path,
                                      const char* summary_path);
TFM_API tfm_status tfm_bench_run_text(const char* config_text,
                                      const char* records_path,
                                      const char* summary_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TFM_TFM_H */
