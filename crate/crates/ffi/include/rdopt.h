#ifndef RDOPT_H
#define RDOPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RdoptKernel {
  RDOPT_KERNEL_MATERN52 = 0,
  RDOPT_KERNEL_ABS_EXPONENTIAL = 1,
} RdoptKernel;

typedef enum RdoptStatus {
  RDOPT_STATUS_OK = 0,
  RDOPT_STATUS_NULL_POINTER = 1,
  RDOPT_STATUS_INVALID_ARGUMENT = 2,
  RDOPT_STATUS_DIMENSION_MISMATCH = 3,
  RDOPT_STATUS_OUT_OF_BOUNDS = 4,
  RDOPT_STATUS_NUMERICAL = 5,
  RDOPT_STATUS_EVALUATION = 6,
  RDOPT_STATUS_CONFIG = 7,
  RDOPT_STATUS_IO = 8,
  RDOPT_STATUS_ARTIFACT = 9,
  RDOPT_STATUS_STAGE = 10,
  RDOPT_STATUS_PANIC = 11,
} RdoptStatus;

/**
 * Fitted Kriging model.
 */
typedef struct RdoptModel RdoptModel;

/**
 * Benchmark problem from the registry.
 */
typedef struct RdoptProblem RdoptProblem;

/**
 * Sample summary; `q1..q3` use the `(n - 1) p` quantile position and
 * `std` is the population standard deviation.
 */
typedef struct RdoptBoxplot {
  double min;
  double q1;
  double q2;
  double q3;
  double max;
  double mean;
  double std;
} RdoptBoxplot;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library on the same thread.
 */
const char *rdopt_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rdopt_version(void);

/**
 * Fits a Kriging model on `n` points of dimension `d` (row-major `x`).
 * `restarts = 0` uses the default.
 *
 * # Safety
 * `x` must hold `n * d` doubles, `y` `n` doubles; `out` must be writable.
 */
enum RdoptStatus rdopt_model_fit(const double *x,
                                 size_t n,
                                 size_t d,
                                 const double *y,
                                 enum RdoptKernel kernel,
                                 double nugget,
                                 size_t restarts,
                                 uint64_t seed,
                                 struct RdoptModel **out);

/**
 * Loads a model artifact written by `rdopt_model_save` or the CLI.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum RdoptStatus rdopt_model_load(const char *path, struct RdoptModel **out);

/**
 * # Safety
 * `model` must come from this library; `path` must be NUL-terminated.
 */
enum RdoptStatus rdopt_model_save(const struct RdoptModel *model, const char *path);

/**
 * Input dimension of the model, 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or come from this library.
 */
size_t rdopt_model_dim(const struct RdoptModel *model);

/**
 * Predicts at `n` points. `variance` may be NULL.
 *
 * # Safety
 * `x` must hold `n * dim` doubles, `mean` (and `variance` if not NULL) `n`.
 */
enum RdoptStatus rdopt_model_predict(const struct RdoptModel *model,
                                     const double *x,
                                     size_t n,
                                     double *mean,
                                     double *variance);

/**
 * # Safety
 * `model` must be NULL or come from this library, and not be used again.
 */
void rdopt_model_free(struct RdoptModel *model);

/**
 * Builds a registered problem. `dim = 0` keeps its default dimension.
 *
 * # Safety
 * `name` must be NUL-terminated; `out` must be writable.
 */
enum RdoptStatus rdopt_problem_new(const char *name, size_t dim, struct RdoptProblem **out);

/**
 * # Safety
 * `problem` must be NULL or come from this library.
 */
size_t rdopt_problem_dim(const struct RdoptProblem *problem);

/**
 * # Safety
 * `problem` must be NULL or come from this library.
 */
size_t rdopt_problem_n_objectives(const struct RdoptProblem *problem);

/**
 * Evaluates at one native-unit point; writes the objectives in their
 * natural sense.
 *
 * # Safety
 * `x` must hold `dim` doubles and `out` `n_objectives` doubles.
 */
enum RdoptStatus rdopt_problem_evaluate(const struct RdoptProblem *problem,
                                        const double *x,
                                        double *out);

/**
 * # Safety
 * `problem` must be NULL or come from this library, and not be used again.
 */
void rdopt_problem_free(struct RdoptProblem *problem);

/**
 * NRMSE in percent of `n` predictions.
 *
 * # Safety
 * `y_real` and `y_pred` must hold `n` doubles; `out` must be writable.
 */
enum RdoptStatus rdopt_nrmse(const double *y_real, const double *y_pred, size_t n, double *out);

/**
 * Boxplot summary of `n` finite values.
 *
 * # Safety
 * `values` must hold `n` doubles; `out` must be writable.
 */
enum RdoptStatus rdopt_boxplot_stats(const double *values, size_t n, struct RdoptBoxplot *out);

/**
 * Runs the full pipeline from a TOML config. `out_dir` may be NULL to keep
 * the config's output directory.
 *
 * # Safety
 * `config_path` and, if not NULL, `out_dir` must be NUL-terminated.
 */
enum RdoptStatus rdopt_run_pipeline(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RDOPT_H */
