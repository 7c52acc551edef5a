/* C interface to the sparse phase retrieval library.
 *
 * Every function returns an spr_status. On failure the message of the last
 * error on the calling thread is available from spr_last_error(). Objects are
 * opaque handles released with the matching *_free function; passing NULL to
 * a free function is a no-op.
 */
#ifndef SPARSE_PR_H
#define SPARSE_PR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(SPARSE_PR_BUILDING_LIBRARY)
#define SPR_API __declspec(dllexport)
#else
#define SPR_API __declspec(dllimport)
#endif
#else
#define SPR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spr_status {
  SPR_OK = 0,
  SPR_INVALID_PARAMETER = 1,
  SPR_NUMERIC_DOMAIN = 2,
  SPR_NUMERIC_OVERFLOW = 3,
  SPR_DEGENERATE_DATA = 4,
  SPR_DIVERGED = 5,
  SPR_SWEEP_FAILURE = 6,
  SPR_IO = 7,
  SPR_INTERNAL = 8
} spr_status;

typedef struct spr_signal spr_signal;
typedef struct spr_dataset spr_dataset;
typedef struct spr_trajectory spr_trajectory;
typedef struct spr_report spr_report;

SPR_API const char* spr_version(void);
SPR_API const char* spr_status_string(spr_status status);
/* Message of the last failed call on this thread; "" if none. */
SPR_API const char* spr_last_error(void);

/* ---- problems ----------------------------------------------------------- */

typedef struct spr_problem_params {
  size_t n;
  size_t k;
  size_t m;
  /* sigma / ||x*||^2 when noise_relative is nonzero, else sigma. */
  double noise;
  int noise_relative;
} spr_problem_params;

SPR_API spr_status spr_problem_generate(const spr_problem_params* params, uint64_t seed, spr_signal** signal,
                                        spr_dataset** dataset);

SPR_API spr_status spr_signal_create(const double* values, size_t n, spr_signal** out);
SPR_API void spr_signal_free(spr_signal* signal);
SPR_API size_t spr_signal_dim(const spr_signal* signal);
SPR_API size_t spr_signal_sparsity(const spr_signal* signal);
SPR_API double spr_signal_norm(const spr_signal* signal);
/* Copies the n values into out. */
SPR_API spr_status spr_signal_values(const spr_signal* signal, double* out, size_t n);

/* sensing is m x n in row-major order. */
SPR_API spr_status spr_dataset_create(const double* sensing, const double* observations, size_t m, size_t n,
                                      double sigma, uint64_t seed, spr_dataset** out);
SPR_API void spr_dataset_free(spr_dataset* dataset);
SPR_API size_t spr_dataset_rows(const spr_dataset* dataset);
SPR_API size_t spr_dataset_dim(const spr_dataset* dataset);
SPR_API spr_status spr_dataset_observations(const spr_dataset* dataset, double* out, size_t m);
SPR_API spr_status spr_dataset_read_csv(const char* path, spr_dataset** out);
SPR_API spr_status spr_dataset_write_csv(const spr_dataset* dataset, const char* path, int include_sensing);

/* Splits the rows at random; train receives ceil(fraction * m) of them. */
SPR_API spr_status spr_holdout_split(const spr_dataset* dataset, double fraction, uint64_t seed, spr_dataset** train,
                                     spr_dataset** validation);

/* ---- geometry and risk -------------------------------------------------- */

/* Empirical risk at x; grad may be NULL, otherwise receives n entries. */
SPR_API spr_status spr_risk(const spr_dataset* dataset, const double* x, size_t n, double* value, double* grad);
/* D_Phi(x, y) for the hyperbolic entropy with parameter beta. */
SPR_API spr_status spr_bregman(const double* x, const double* y, size_t n, double beta, double* out);

/* ---- solver ------------------------------------------------------------- */

typedef struct spr_solver_config {
  double beta;
  /* <= 0 selects 0.3 / mean(Y)^{3/2}. */
  double eta;
  size_t max_iters;
  size_t record_every;
} spr_solver_config;

SPR_API spr_solver_config spr_solver_config_default(void);

typedef enum spr_run_status { SPR_RUN_COMPLETED = 0, SPR_RUN_STOPPED_EARLY = 1, SPR_RUN_DIVERGED = 2 } spr_run_status;

/* Absent values are NaN. */
typedef struct spr_record {
  size_t t;
  double risk;
  double dist;
  double dist_phi;
  double off_support_l1;
  double coherence;
  double holdout_risk;
} spr_record;

/* Runs mirror descent. signal and holdout may be NULL; with a signal the
 * oracle metrics are recorded and the warm-up time is tracked. On divergence
 * the status is SPR_DIVERGED and *out still receives the partial trajectory. */
SPR_API spr_status spr_solve(const spr_dataset* dataset, const spr_solver_config* config, const spr_signal* signal,
                             const spr_dataset* holdout, spr_trajectory** out);
SPR_API void spr_trajectory_free(spr_trajectory* trajectory);
SPR_API size_t spr_trajectory_size(const spr_trajectory* trajectory);
SPR_API spr_status spr_trajectory_record(const spr_trajectory* trajectory, size_t index, spr_record* out);
SPR_API spr_run_status spr_trajectory_status(const spr_trajectory* trajectory);
SPR_API double spr_trajectory_eta(const spr_trajectory* trajectory);
SPR_API size_t spr_trajectory_initial_coordinate(const spr_trajectory* trajectory);
/* *reached is set to 0 when the warm-up condition was never met. */
SPR_API spr_status spr_trajectory_warmup(const spr_trajectory* trajectory, size_t* t, int* reached);
SPR_API spr_status spr_trajectory_oracle_stop(const spr_trajectory* trajectory, size_t* t, double* rel_error);
SPR_API spr_status spr_trajectory_holdout_stop(const spr_trajectory* trajectory, size_t* t, double* holdout_risk);
SPR_API spr_status spr_trajectory_write_csv(const spr_trajectory* trajectory, const char* path);

/* ---- experiments -------------------------------------------------------- */

typedef struct spr_solve_spec {
  spr_problem_params problem;
  spr_solver_config solver;
  uint64_t seed;
  /* 0 disables the hold-out split. */
  double holdout_fraction;
} spr_solve_spec;

typedef enum spr_axis { SPR_AXIS_NOISE = 0, SPR_AXIS_SAMPLES = 1, SPR_AXIS_SPARSITY = 2, SPR_AXIS_BETA = 3 } spr_axis;

enum { SPR_METRIC_ORACLE = 1, SPR_METRIC_HOLDOUT = 2, SPR_METRIC_WARMUP = 4 };

typedef struct spr_sweep_spec {
  size_t n;
  size_t k;
  size_t m;
  double sigma_over_norm_sq;
  double beta;
  int beta_relative_to_norm;
  /* <= 0 selects the per-trial default. */
  double eta;
  size_t t_max;
  size_t trials;
  uint64_t master_seed;
  spr_axis axis;
  const double* values;
  size_t value_count;
  /* Bitwise OR of SPR_METRIC_* flags. */
  int metrics;
  double holdout_fraction;
} spr_sweep_spec;

SPR_API spr_sweep_spec spr_sweep_spec_default(void);

typedef struct spr_figure_options {
  double scale;
  /* 0 keeps the preset value. */
  size_t trials;
  size_t t_max;
  uint64_t seed;
} spr_figure_options;

SPR_API spr_figure_options spr_figure_options_default(void);

/* A report holds the result of a single solve, a sweep or a set of curves. */
SPR_API spr_status spr_run_solve(const spr_solve_spec* spec, spr_report** out);
SPR_API spr_status spr_run_sweep(const spr_sweep_spec* spec, size_t threads, spr_report** out);
/* name: "1-left", "1-center", "1-right", "2-beta", "2-k" or "3". */
SPR_API spr_status spr_run_figure(const char* name, const spr_figure_options* options, size_t threads,
                                  spr_report** out);
SPR_API void spr_report_free(spr_report* report);

/* Headline fit of a sweep: error slope, or the warm-up fit for warm-up sweeps. */
SPR_API spr_status spr_report_fit(const spr_report* report, double* slope, double* intercept, double* r_squared);
SPR_API spr_status spr_report_spearman(const spr_report* report, double* rho);
SPR_API size_t spr_report_point_count(const spr_report* report);

typedef struct spr_sweep_point {
  double axis_value;
  size_t trials;
  size_t successes;
  size_t failures;
  /* NaN when not measured. */
  double oracle_mean;
  double oracle_stddev;
  double holdout_mean;
  double holdout_stddev;
  double warmup_mean;
  double warmup_stddev;
  int used_in_fit;
} spr_sweep_point;

SPR_API spr_status spr_report_point(const spr_report* report, size_t index, spr_sweep_point* out);
/* Trajectory of a solve report, borrowed from the report. */
SPR_API spr_status spr_report_trajectory(const spr_report* report, const spr_trajectory** out);
/* CSV table and JSON summary of any report kind. */
SPR_API spr_status spr_report_write_csv(const spr_report* report, const char* path);
SPR_API spr_status spr_report_write_json(const spr_report* report, const char* path);

SPR_API spr_status spr_write_error_json(const char* path, const char* code, const char* message);

/* ---- self-test ---------------------------------------------------------- */

typedef void (*spr_check_callback)(const char* name, int passed, const char* detail, void* user);

/* Runs the fast invariant checks, reporting each through callback (may be
 * NULL). *all_passed receives 1 if every check passed. */
SPR_API spr_status spr_selftest(uint64_t seed, spr_check_callback callback, void* user, int* all_passed);

#ifdef __cplusplus
}
#endif

#endif
