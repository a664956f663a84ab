#pragma once

#include "kdtpl/coupling.hpp"
#include "kdtpl/datagen.hpp"
#include "kdtpl/fl_baseline.hpp"
#include "kdtpl/pl_estimator.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kdtpl {

struct StageTimes {
    double radius = 0.0;  // resolving the pairing radius
    double pair = 0.0;    // greedy coupling
    double pl = 0.0;      // sample extraction + closed-form solve
    double weights = 0.0; // k-NN weights + spectrum
    double fl = 0.0;      // concentrated ML search
};

/// Estimates from one simulated dataset under one radius spec.
struct RepResult {
    std::uint64_t seed = 0;
    std::size_t q = 0;
    std::optional<PlFit> pl;
    std::string pl_error;
    std::optional<SemFit> fl;
    std::string fl_error;
    std::string fl_skip_reason; // set when FL was requested but not run
    // Pearson correlation between first- and second-member residuals
    // y - beta_pl x across couplets, and the mean model-implied couplet
    // correlation exp(-phi d / scale). NaN when undefined.
    double resid_corr = 0.0;
    double implied_corr = 0.0;
    StageTimes times;
};

/// simulate -> pair -> PL, and optionally weights -> FL, on one dataset.
/// Failures are recorded in the result rather than thrown.
RepResult run_replication(const DgpConfig& cfg, const RadiusSpec& radius, bool run_fl,
                          std::size_t knn = 5);

struct Metrics {
    std::size_t count = 0;
    double ave = 0.0;
    double bias = 0.0;                // |theta - ave|
    std::optional<double> rel_bias;   // bias / |theta|; absent for theta = 0
    double variance = 0.0;            // mean squared deviation from ave
    double mse = 0.0;                 // variance + bias^2
};

/// Throws InvalidArgument for an empty estimate list.
Metrics compute_metrics(std::span<const double> estimates, double theta_true);

struct McConfig {
    std::vector<double> phis{0.8, 1.0};
    std::vector<std::size_t> ns{200, 800, 1800, 5000};
    std::size_t reps = 100;
    std::vector<RadiusSpec> radius_specs{RadiusSpec::mean()};
    std::size_t knn_k = 5;
    std::uint64_t base_seed = 0;
    bool run_fl = true;
    std::size_t workers = 1;
    std::size_t fl_max_n = 5000;
    double fl_time_cap = 0.0; // seconds of FL per (phi, n); 0 = unlimited

    // DGP settings shared by every cell.
    double beta = 1.0;
    double sigma = 1.0;
    double domain = 1000.0;
    DistanceScaling scaling = DistanceScaling::MeanNearestNeighbor;
};

struct McRow {
    double phi = 0.0;
    std::size_t n = 0;
    RadiusSpec radius;
    std::size_t reps = 0;

    std::size_t pl_ok = 0;
    std::size_t pl_failed = 0;
    double q_mean = 0.0;
    std::size_t q_min = 0;
    std::size_t q_max = 0;
    std::optional<Metrics> beta_pl, sigma_pl, psi_pl;
    double psi_target = 0.0; // average implied couplet correlation

    std::size_t fl_ok = 0;
    std::size_t fl_failed = 0;
    std::size_t fl_skipped = 0;
    std::string fl_skip_reason;
    std::optional<Metrics> beta_fl, sigma_fl, rho_fl;

    double resid_corr_ave = 0.0;
    double implied_corr_ave = 0.0;
    StageTimes median_times;

    std::uint64_t base_seed = 0;
    std::vector<RepResult> replications; // in replication order
    bool cell_failed = false;
};

struct McReport {
    McConfig config;
    std::vector<McRow> rows; // phi-major, then n, then radius spec

    std::vector<const McRow*> failed_cells() const;
};

/// Replication r of every cell uses seed base_seed + r. Datasets are shared
/// across radius specs within a (phi, n) pair, so buffer comparisons are
/// paired. Rows whose replications all failed are flagged cell_failed.
McReport run_montecarlo(const McConfig& mc);

/// The radius specs used by the buffer study: mean, max, mean+{50..800}.
std::vector<RadiusSpec> buffer_radius_specs();

/// run_montecarlo with radius_specs replaced by buffer_radius_specs().
McReport buffer_sweep(McConfig mc);

/// One row per cell, estimates only; deterministic for a fixed config.
void write_report_csv(const McReport& report, const std::filesystem::path& path);
/// Median stage times per cell.
void write_report_timing_csv(const McReport& report, const std::filesystem::path& path);
/// Config, rows and every replication with seeds, estimates and errors.
void write_report_json(const McReport& report, const std::filesystem::path& path);

struct BenchConfig {
    std::vector<std::size_t> ns{500, 1000, 2000, 4000};
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    double phi = 1.0;
    std::size_t knn_k = 5;
    RadiusSpec radius = RadiusSpec::mean();
    std::size_t fl_max_n = 5000;
};

struct TimingPoint {
    std::size_t n = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    std::vector<double> samples;
};

struct TimingSeries {
    std::string method;
    std::vector<TimingPoint> points;
    // Least squares of log(median) on log(n); NaN with fewer than two points.
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; // RMS of the fit residuals
};

struct BenchRow {
    std::size_t n = 0;
    double radius = 0.0;
    std::size_t q = 0;
    std::optional<PlFit> pl;
    std::optional<SemFit> fl;
};

struct TimingReport {
    BenchConfig config;
    TimingSeries pl;     // pair + PL solve
    TimingSeries fl;     // weights + spectrum + FL solve
    TimingSeries radius; // radius resolution, reported separately
    std::vector<BenchRow> rows;
};

/// Sequential. One discarded warm-up run per method and n. Throws
/// InvalidArgument unless ns is ascending and repeats >= 3.
TimingReport timing_benchmark(const BenchConfig& cfg);

/// Estimates on the benchmark datasets; deterministic.
void write_bench_report_csv(const TimingReport& report, const std::filesystem::path& path);
/// method,n,median_s,q1_s,q3_s
void write_bench_timing_csv(const TimingReport& report, const std::filesystem::path& path);
/// n,seconds
void write_plot_csv(const TimingSeries& series, const std::filesystem::path& path);
void write_bench_json(const TimingReport& report, const std::filesystem::path& path);

/// Type-7 quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

} // namespace kdtpl
