/*
 * kdtpl C API.
 *
 * Every entry point returns a kdtpl_status. On failure, kdtpl_last_error()
 * returns a message for the calling thread, valid until that thread's next
 * call into the library. Objects are opaque handles released with the
 * matching *_free function; passing NULL to *_free is a no-op.
 */
#ifndef KDTPL_H
#define KDTPL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(KDTPL_BUILDING)
#    define KDTPL_API __declspec(dllexport)
#  else
#    define KDTPL_API __declspec(dllimport)
#  endif
#else
#  define KDTPL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kdtpl_status {
    KDTPL_OK = 0,
    KDTPL_ERR_EMPTY_INPUT = 1,
    KDTPL_ERR_INDEX = 2,
    KDTPL_ERR_INSUFFICIENT_POINTS = 3,
    KDTPL_ERR_INVALID_RADIUS = 4,
    KDTPL_ERR_MISSING_DATA = 5,
    KDTPL_ERR_EMPTY_SAMPLE = 6,
    KDTPL_ERR_INVALID_PARAMS = 7,
    KDTPL_ERR_SINGULAR_SYSTEM = 8,
    KDTPL_ERR_DEGENERATE_VARIANCE = 9,
    KDTPL_ERR_INSUFFICIENT_COUPLES = 10,
    KDTPL_ERR_NO_CONVERGENCE = 11,
    KDTPL_ERR_INVALID_K = 12,
    KDTPL_ERR_INVALID_RHO = 13,
    KDTPL_ERR_SINGULAR_DESIGN = 14,
    KDTPL_ERR_NOT_POSITIVE_DEFINITE = 15,
    KDTPL_ERR_RB_UNDEFINED = 16,
    KDTPL_ERR_CELL_FAILED = 17,
    KDTPL_ERR_IO = 18,
    KDTPL_ERR_PARSE = 19,
    KDTPL_ERR_INVALID_ARGUMENT = 20,
    KDTPL_ERR_INTERNAL = 99
} kdtpl_status;

typedef struct kdtpl_points kdtpl_points;
typedef struct kdtpl_couplets kdtpl_couplets;
typedef struct kdtpl_report kdtpl_report;
typedef struct kdtpl_timing kdtpl_timing;

KDTPL_API const char* kdtpl_version(void);
/* Stable name of a status, e.g. "InsufficientCouples". */
KDTPL_API const char* kdtpl_status_name(kdtpl_status status);
KDTPL_API const char* kdtpl_last_error(void);

/* ---- points ------------------------------------------------------------ */

/* x_cov and y_resp may both be NULL. */
KDTPL_API kdtpl_status kdtpl_points_create(size_t n, const double* x, const double* y,
                                           const double* x_cov, const double* y_resp,
                                           kdtpl_points** out);
KDTPL_API kdtpl_status kdtpl_points_read_csv(const char* path, kdtpl_points** out);
KDTPL_API kdtpl_status kdtpl_points_write_csv(const kdtpl_points* points, const char* path);
KDTPL_API size_t kdtpl_points_size(const kdtpl_points* points);
KDTPL_API int kdtpl_points_has_data(const kdtpl_points* points);
KDTPL_API void kdtpl_points_free(kdtpl_points* points);

typedef enum kdtpl_scaling {
    KDTPL_SCALING_NN_MEAN = 0,
    KDTPL_SCALING_MEAN = 1,
    KDTPL_SCALING_MAX = 2,
    KDTPL_SCALING_NONE = 3
} kdtpl_scaling;

typedef struct kdtpl_dgp_config {
    size_t n;
    double phi;
    double beta;
    double sigma;
    double domain;
    kdtpl_scaling scaling;
    uint64_t seed;
} kdtpl_dgp_config;

/* n=200, phi=1, beta=1, sigma=1, domain=1000, nearest-neighbor scaling, seed 0. */
KDTPL_API kdtpl_dgp_config kdtpl_dgp_config_default(void);
KDTPL_API kdtpl_status kdtpl_parse_scaling(const char* text, kdtpl_scaling* out);
KDTPL_API const char* kdtpl_scaling_name(kdtpl_scaling scaling);
KDTPL_API kdtpl_status kdtpl_simulate(const kdtpl_dgp_config* config, kdtpl_points** out);

/* ---- pairing ----------------------------------------------------------- */

typedef enum kdtpl_radius_kind {
    KDTPL_RADIUS_MEAN = 0,
    KDTPL_RADIUS_MAX = 1,
    KDTPL_RADIUS_MEAN_PLUS = 2,
    KDTPL_RADIUS_FIXED = 3
} kdtpl_radius_kind;

typedef struct kdtpl_radius_spec {
    kdtpl_radius_kind kind;
    double value;
} kdtpl_radius_spec;

/* "mean", "max", "mean+H" or a positive number. */
KDTPL_API kdtpl_status kdtpl_radius_parse(const char* text, kdtpl_radius_spec* out);
/* Writes the canonical label into buf (NUL-terminated, truncated to size). */
KDTPL_API kdtpl_status kdtpl_radius_label(kdtpl_radius_spec spec, char* buf, size_t size);
KDTPL_API kdtpl_status kdtpl_resolve_radius(const kdtpl_points* points, kdtpl_radius_spec spec,
                                            double* radius);

typedef struct kdtpl_pair_options {
    int shuffle;              /* nonzero: scan points in a seeded random order */
    uint64_t shuffle_seed;
    double min_separation;    /* <= 0 disables the separation filter */
} kdtpl_pair_options;

/* options may be NULL (ascending order, no filter). */
KDTPL_API kdtpl_status kdtpl_pair(const kdtpl_points* points, double radius,
                                  const kdtpl_pair_options* options, kdtpl_couplets** out);
KDTPL_API kdtpl_status kdtpl_couplets_read_csv(const char* path, size_t n, kdtpl_couplets** out);
KDTPL_API kdtpl_status kdtpl_couplets_write_csv(const kdtpl_couplets* cs, const char* path);
KDTPL_API kdtpl_status kdtpl_couplets_write_unpaired_csv(const kdtpl_couplets* cs,
                                                         const char* path);
KDTPL_API size_t kdtpl_couplets_count(const kdtpl_couplets* cs);
KDTPL_API kdtpl_status kdtpl_couplets_get(const kdtpl_couplets* cs, size_t k, size_t* i,
                                          size_t* l, double* dist);
KDTPL_API void kdtpl_couplets_free(kdtpl_couplets* cs);

typedef struct kdtpl_pairing_summary {
    size_t n;
    size_t q;
    size_t unpaired;
    double rate;
    int has_distances; /* mean_dist/max_dist are meaningful only when set */
    double mean_dist;
    double max_dist;
} kdtpl_pairing_summary;

KDTPL_API kdtpl_status kdtpl_pairing_report(const kdtpl_couplets* cs, kdtpl_pairing_summary* out);

/* ---- estimation -------------------------------------------------------- */

typedef struct kdtpl_pl_fit {
    double beta;
    double sigma2;
    double psi;
    double loglik;
    size_t q;
    size_t iterations;
    int converged;
} kdtpl_pl_fit;

KDTPL_API kdtpl_status kdtpl_fit_pl(const kdtpl_points* points, const kdtpl_couplets* cs,
                                    kdtpl_pl_fit* out);
KDTPL_API kdtpl_status kdtpl_fit_pl_numerical(const kdtpl_points* points,
                                              const kdtpl_couplets* cs, kdtpl_pl_fit* out);

typedef struct kdtpl_sem_fit {
    double beta;
    double sigma2;
    double rho;
    double loglik;
    int converged;
} kdtpl_sem_fit;

KDTPL_API kdtpl_status kdtpl_fit_fl(const kdtpl_points* points, size_t knn, kdtpl_sem_fit* out);

/* ---- experiments ------------------------------------------------------- */

typedef struct kdtpl_mc_config {
    const double* phis;
    size_t phi_count;
    const size_t* ns;
    size_t n_count;
    size_t reps;
    const kdtpl_radius_spec* radii; /* ignored by kdtpl_buffer_sweep */
    size_t radius_count;
    size_t knn;
    uint64_t base_seed;
    int run_fl;
    size_t workers;
    size_t fl_max_n;
    double fl_time_cap; /* seconds per (phi, n); 0 = unlimited */
    double beta;
    double sigma;
    double domain;
    kdtpl_scaling scaling;
} kdtpl_mc_config;

/* Defaults with all array pointers NULL. */
KDTPL_API kdtpl_mc_config kdtpl_mc_config_default(void);

/* On KDTPL_ERR_CELL_FAILED a report is still returned in *out. */
KDTPL_API kdtpl_status kdtpl_mc_run(const kdtpl_mc_config* config, kdtpl_report** out);
KDTPL_API kdtpl_status kdtpl_buffer_sweep(const kdtpl_mc_config* config, kdtpl_report** out);
KDTPL_API size_t kdtpl_report_rows(const kdtpl_report* report);
KDTPL_API kdtpl_status kdtpl_report_write_csv(const kdtpl_report* report, const char* path);
KDTPL_API kdtpl_status kdtpl_report_write_timing_csv(const kdtpl_report* report,
                                                     const char* path);
KDTPL_API kdtpl_status kdtpl_report_write_json(const kdtpl_report* report, const char* path);
KDTPL_API void kdtpl_report_free(kdtpl_report* report);

typedef struct kdtpl_bench_config {
    const size_t* ns;
    size_t n_count;
    size_t repeats;
    uint64_t seed;
    double phi;
    size_t knn;
    kdtpl_radius_spec radius;
    size_t fl_max_n;
} kdtpl_bench_config;

KDTPL_API kdtpl_bench_config kdtpl_bench_config_default(void);
KDTPL_API kdtpl_status kdtpl_bench_run(const kdtpl_bench_config* config, kdtpl_timing** out);
/* method: "pl", "fl" or "radius". NaN when fewer than two sizes were timed. */
KDTPL_API kdtpl_status kdtpl_timing_slope(const kdtpl_timing* timing, const char* method,
                                          double* slope);
KDTPL_API kdtpl_status kdtpl_timing_write_report_csv(const kdtpl_timing* timing,
                                                     const char* path);
KDTPL_API kdtpl_status kdtpl_timing_write_csv(const kdtpl_timing* timing, const char* path);
KDTPL_API kdtpl_status kdtpl_timing_write_plot_csv(const kdtpl_timing* timing,
                                                   const char* method, const char* path);
KDTPL_API kdtpl_status kdtpl_timing_write_json(const kdtpl_timing* timing, const char* path);
KDTPL_API void kdtpl_timing_free(kdtpl_timing* timing);

#ifdef __cplusplus
}
#endif

#endif /* KDTPL_H */
