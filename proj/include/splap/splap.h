/*
 * C interface to the splap library: space-time finite element simulation of
 * stochastic p-Laplace equations and Monte-Carlo estimation of their time
 * convergence rate.
 *
 * All functions return a splap_status. On failure the thread-local message
 * returned by splap_last_error() describes the problem. Objects are opaque
 * handles released with the matching *_free function; passing NULL to a
 * *_free function is a no-op.
 */
#ifndef SPLAP_H
#define SPLAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SPLAP_BUILDING_LIBRARY)
#    define SPLAP_API __declspec(dllexport)
#  else
#    define SPLAP_API __declspec(dllimport)
#  endif
#else
#  define SPLAP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum splap_status {
  SPLAP_OK = 0,
  SPLAP_ERR_INPUT = 1,
  SPLAP_ERR_PARSE = 2,
  SPLAP_ERR_VALIDATION = 3,
  SPLAP_ERR_CONFIG = 4,
  SPLAP_ERR_CONVERGENCE = 5,
  SPLAP_ERR_IO = 6,
  SPLAP_ERR_INTERNAL = 7,
  /* The experiment ran, but some (p, replicate) cells failed. */
  SPLAP_ERR_PARTIAL = 8
} splap_status;

typedef struct splap_config splap_config;
typedef struct splap_mesh splap_mesh;
typedef struct splap_summary splap_summary;

/* Rate estimate for one exponent p. Fields that could not be computed are NaN. */
typedef struct splap_rate {
  double p;
  double tau_ref;
  int replicates;
  double a_tilde;      /* mean of per-replicate regression slopes */
  double a_tilde_std;  /* their sample standard deviation */
  double a;            /* bias-corrected slope */
  double alpha;        /* a / 2 */
  double alpha_std;
  double mean_curve_a_tilde; /* slope of the regression on the mean curve */
} splap_rate;

SPLAP_API const char* splap_version(void);
SPLAP_API const char* splap_last_error(void);
SPLAP_API const char* splap_status_string(splap_status status);

/* ---- experiment configuration ------------------------------------------ */

SPLAP_API splap_status splap_config_default(splap_config** out);
SPLAP_API splap_status splap_config_parse_file(const char* path, splap_config** out);
SPLAP_API splap_status splap_config_parse_string(const char* text, splap_config** out);
SPLAP_API splap_status splap_config_set_seed(splap_config* cfg, uint64_t seed);
SPLAP_API splap_status splap_config_set_output_dir(splap_config* cfg, const char* dir);
SPLAP_API splap_status splap_config_output_dir(const splap_config* cfg, char* buf,
                                               size_t cap, size_t* needed);
/* Canonical `key = value` text. Writes at most cap bytes including the NUL;
 * *needed receives the full size including the NUL. */
SPLAP_API splap_status splap_config_echo(const splap_config* cfg, char* buf, size_t cap,
                                         size_t* needed);
SPLAP_API void splap_config_free(splap_config* cfg);

/* ---- experiment --------------------------------------------------------- */

/* Runs the protocol and writes results.csv, summary.json, fig_p<p>.svg,
 * config.echo and run.log into the configured output directory. workers = 0
 * uses the hardware concurrency. Returns SPLAP_OK or SPLAP_ERR_PARTIAL with a
 * summary in both cases. */
SPLAP_API splap_status splap_run_experiment(const splap_config* cfg, unsigned workers,
                                            splap_summary** out);
/* Recomputes summary.json and the figures from a results.csv. */
SPLAP_API splap_status splap_plot_from_csv(const char* csv_path, const char* out_dir,
                                           double fit_tau_max, splap_summary** out);
SPLAP_API size_t splap_summary_count(const splap_summary* summary);
SPLAP_API size_t splap_summary_failure_count(const splap_summary* summary);
SPLAP_API splap_status splap_summary_get(const splap_summary* summary, size_t index,
                                         splap_rate* out);
SPLAP_API void splap_summary_free(splap_summary* summary);

/* ---- meshes ------------------------------------------------------------- */

SPLAP_API splap_status splap_mesh_unit_square(int n, splap_mesh** out);
SPLAP_API splap_status splap_mesh_load_file(const char* path, splap_mesh** out);
SPLAP_API splap_status splap_mesh_load_string(const char* text, splap_mesh** out);
SPLAP_API splap_status splap_mesh_counts(const splap_mesh* mesh, size_t* vertices,
                                         size_t* simplices);
SPLAP_API splap_status splap_mesh_nondegeneracy(const splap_mesh* mesh, double* out);
SPLAP_API splap_status splap_mesh_size(const splap_mesh* mesh, double* out);
SPLAP_API splap_status splap_mesh_save(const splap_mesh* mesh, char* buf, size_t cap,
                                       size_t* needed);
SPLAP_API void splap_mesh_free(splap_mesh* mesh);

/* ---- rate analysis ------------------------------------------------------ */

SPLAP_API splap_status splap_bias(double tau, double tau_ref, double a, double* out);
SPLAP_API splap_status splap_corrected_rate(double a_tilde, const double* taus, size_t n,
                                            double tau_ref, double* a, double* alpha);
SPLAP_API splap_status splap_fit_rate(const double* taus, const double* values, size_t n,
                                      double* log_c, double* a, double* stderr_slope);

#ifdef __cplusplus
}
#endif

#endif /* SPLAP_H */
