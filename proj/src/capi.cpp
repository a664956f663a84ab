#include "kdtpl/kdtpl.h"

#include "kdtpl/coupling.hpp"
#include "kdtpl/datagen.hpp"
#include "kdtpl/error.hpp"
#include "kdtpl/experiments.hpp"
#include "kdtpl/fl_baseline.hpp"
#include "kdtpl/pl_estimator.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#ifndef KDTPL_VERSION
#define KDTPL_VERSION "0.0.0"
#endif

struct kdtpl_points {
    kdtpl::PointSet value;
};
struct kdtpl_couplets {
    kdtpl::CoupletSet value;
};
struct kdtpl_report {
    kdtpl::McReport value;
};
struct kdtpl_timing {
    kdtpl::TimingReport value;
};

namespace {

thread_local std::string last_error;

kdtpl_status to_status(kdtpl::ErrorCode code) { return static_cast<kdtpl_status>(code); }

template <class Fn>
kdtpl_status guarded(Fn&& fn) {
    last_error.clear();
    try {
        fn();
        return KDTPL_OK;
    } catch (const kdtpl::Error& e) {
        last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return KDTPL_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return KDTPL_ERR_INTERNAL;
    }
}

void require(const void* p, const char* what) {
    if (!p) kdtpl::fail(kdtpl::ErrorCode::InvalidArgument, std::string(what) + " is NULL");
}

kdtpl::RadiusSpec from_c(kdtpl_radius_spec s) {
    switch (s.kind) {
    case KDTPL_RADIUS_MEAN: return kdtpl::RadiusSpec::mean();
    case KDTPL_RADIUS_MAX: return kdtpl::RadiusSpec::max();
    case KDTPL_RADIUS_MEAN_PLUS: return kdtpl::RadiusSpec::mean_plus(s.value);
    case KDTPL_RADIUS_FIXED: return kdtpl::RadiusSpec::fixed(s.value);
    }
    kdtpl::fail(kdtpl::ErrorCode::InvalidArgument, "unknown radius kind");
}

kdtpl_radius_spec to_c(const kdtpl::RadiusSpec& s) {
    return {static_cast<kdtpl_radius_kind>(static_cast<int>(s.kind)), s.value};
}

kdtpl::DistanceScaling from_c(kdtpl_scaling s) {
    switch (s) {
    case KDTPL_SCALING_NN_MEAN: return kdtpl::DistanceScaling::MeanNearestNeighbor;
    case KDTPL_SCALING_MEAN: return kdtpl::DistanceScaling::MeanDistance;
    case KDTPL_SCALING_MAX: return kdtpl::DistanceScaling::MaxDistance;
    case KDTPL_SCALING_NONE: return kdtpl::DistanceScaling::None;
    }
    kdtpl::fail(kdtpl::ErrorCode::InvalidArgument, "unknown scaling");
}

kdtpl::McConfig from_c(const kdtpl_mc_config& c, bool need_radii) {
    kdtpl::McConfig mc;
    if (c.phi_count == 0 || c.n_count == 0)
        kdtpl::fail(kdtpl::ErrorCode::InvalidArgument, "phis and ns must be nonempty");
    require(c.phis, "phis");
    require(c.ns, "ns");
    mc.phis.assign(c.phis, c.phis + c.phi_count);
    mc.ns.assign(c.ns, c.ns + c.n_count);
    mc.radius_specs.clear();
    if (need_radii) {
        if (c.radius_count == 0) kdtpl::fail(kdtpl::ErrorCode::InvalidArgument, "no radius specs");
        require(c.radii, "radii");
        for (size_t i = 0; i < c.radius_count; ++i) mc.radius_specs.push_back(from_c(c.radii[i]));
    }
    mc.reps = c.reps;
    mc.knn_k = c.knn;
    mc.base_seed = c.base_seed;
    mc.run_fl = c.run_fl != 0;
    mc.workers = c.workers;
    mc.fl_max_n = c.fl_max_n;
    mc.fl_time_cap = c.fl_time_cap;
    mc.beta = c.beta;
    mc.sigma = c.sigma;
    mc.domain = c.domain;
    mc.scaling = from_c(c.scaling);
    return mc;
}

kdtpl_pl_fit to_c(const kdtpl::PlFit& f) {
    return {f.params.beta, f.params.sigma2, f.params.psi, f.loglik,
            f.q,           f.iterations,    f.converged ? 1 : 0};
}

const kdtpl::TimingSeries& series(const kdtpl::TimingReport& t, const char* method) {
    const std::string m = method ? method : "";
    if (m == "pl") return t.pl;
    if (m == "fl") return t.fl;
    if (m == "radius") return t.radius;
    kdtpl::fail(kdtpl::ErrorCode::InvalidArgument, "method must be pl, fl or radius");
}

} // namespace

extern "C" {

const char* kdtpl_version(void) { return KDTPL_VERSION; }

const char* kdtpl_status_name(kdtpl_status status) {
    if (status == KDTPL_OK) return "Ok";
    if (status == KDTPL_ERR_INTERNAL) return "Internal";
    if (status >= KDTPL_ERR_EMPTY_INPUT && status <= KDTPL_ERR_INVALID_ARGUMENT)
        return kdtpl::error_name(static_cast<kdtpl::ErrorCode>(status)).data();
    return "Unknown";
}

const char* kdtpl_last_error(void) { return last_error.c_str(); }

kdtpl_status kdtpl_points_create(size_t n, const double* x, const double* y, const double* x_cov,
                                 const double* y_resp, kdtpl_points** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        if (n > 0) {
            require(x, "x");
            require(y, "y");
        }
        if ((x_cov == nullptr) != (y_resp == nullptr))
            kdtpl::fail(kdtpl::ErrorCode::InvalidArgument, "x_cov and y_resp go together");
        kdtpl::PointSet ps(std::vector<double>(x, x + n), std::vector<double>(y, y + n));
        if (x_cov) ps.set_data(std::vector<double>(x_cov, x_cov + n),
                               std::vector<double>(y_resp, y_resp + n));
        *out = new kdtpl_points{std::move(ps)};
    });
}

kdtpl_status kdtpl_points_read_csv(const char* path, kdtpl_points** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        *out = new kdtpl_points{kdtpl::read_points_csv(path)};
    });
}

kdtpl_status kdtpl_points_write_csv(const kdtpl_points* points, const char* path) {
    return guarded([&] {
        require(points, "points");
        require(path, "path");
        kdtpl::write_points_csv(points->value, path);
    });
}

size_t kdtpl_points_size(const kdtpl_points* points) { return points ? points->value.size() : 0; }

int kdtpl_points_has_data(const kdtpl_points* points) {
    return points && points->value.has_data() ? 1 : 0;
}

void kdtpl_points_free(kdtpl_points* points) { delete points; }

kdtpl_dgp_config kdtpl_dgp_config_default(void) {
    const kdtpl::DgpConfig d;
    return {d.n, d.phi, d.beta, d.sigma, d.domain, KDTPL_SCALING_NN_MEAN, d.seed};
}

kdtpl_status kdtpl_parse_scaling(const char* text, kdtpl_scaling* out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = static_cast<kdtpl_scaling>(static_cast<int>(kdtpl::parse_scaling(text)));
    });
}

const char* kdtpl_scaling_name(kdtpl_scaling scaling) {
    switch (scaling) {
    case KDTPL_SCALING_NN_MEAN: return "nn-mean";
    case KDTPL_SCALING_MEAN: return "mean";
    case KDTPL_SCALING_MAX: return "max";
    case KDTPL_SCALING_NONE: return "none";
    }
    return "unknown";
}

kdtpl_status kdtpl_simulate(const kdtpl_dgp_config* config, kdtpl_points** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = nullptr;
        kdtpl::DgpConfig cfg;
        cfg.n = config->n;
        cfg.phi = config->phi;
        cfg.beta = config->beta;
        cfg.sigma = config->sigma;
        cfg.domain = config->domain;
        cfg.scaling = from_c(config->scaling);
        cfg.seed = config->seed;
        *out = new kdtpl_points{kdtpl::simulate_dataset(cfg).points};
    });
}

kdtpl_status kdtpl_radius_parse(const char* text, kdtpl_radius_spec* out) {
    return guarded([&] {
        require(text, "text");
        require(out, "out");
        *out = to_c(kdtpl::RadiusSpec::parse(text));
    });
}

kdtpl_status kdtpl_radius_label(kdtpl_radius_spec spec, char* buf, size_t size) {
    return guarded([&] {
        require(buf, "buf");
        if (size == 0) kdtpl::fail(kdtpl::ErrorCode::InvalidArgument, "empty buffer");
        const std::string label = from_c(spec).label();
        const size_t len = std::min(label.size(), size - 1);
        std::memcpy(buf, label.data(), len);
        buf[len] = '\0';
    });
}

kdtpl_status kdtpl_resolve_radius(const kdtpl_points* points, kdtpl_radius_spec spec,
                                  double* radius) {
    return guarded([&] {
        require(points, "points");
        require(radius, "radius");
        *radius = kdtpl::resolve_radius(points->value, from_c(spec));
    });
}

kdtpl_status kdtpl_pair(const kdtpl_points* points, double radius,
                        const kdtpl_pair_options* options, kdtpl_couplets** out) {
    return guarded([&] {
        require(points, "points");
        require(out, "out");
        *out = nullptr;
        kdtpl::PairingOptions opts;
        if (options) {
            if (options->shuffle) {
                opts.order = kdtpl::PairingOptions::Order::Shuffled;
                opts.shuffle_seed = options->shuffle_seed;
            }
            if (options->min_separation > 0.0) opts.min_separation = options->min_separation;
        }
        *out = new kdtpl_couplets{kdtpl::pair_points(points->value, radius, opts)};
    });
}

kdtpl_status kdtpl_couplets_read_csv(const char* path, size_t n, kdtpl_couplets** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "out");
        *out = nullptr;
        *out = new kdtpl_couplets{kdtpl::read_couplets_csv(path, n)};
    });
}

kdtpl_status kdtpl_couplets_write_csv(const kdtpl_couplets* cs, const char* path) {
    return guarded([&] {
        require(cs, "couplets");
        require(path, "path");
        kdtpl::write_couplets_csv(cs->value, path);
    });
}

kdtpl_status kdtpl_couplets_write_unpaired_csv(const kdtpl_couplets* cs, const char* path) {
    return guarded([&] {
        require(cs, "couplets");
        require(path, "path");
        kdtpl::write_unpaired_csv(cs->value, path);
    });
}

size_t kdtpl_couplets_count(const kdtpl_couplets* cs) { return cs ? cs->value.q() : 0; }

kdtpl_status kdtpl_couplets_get(const kdtpl_couplets* cs, size_t k, size_t* i, size_t* l,
                                double* dist) {
    return guarded([&] {
        require(cs, "couplets");
        if (k >= cs->value.q()) kdtpl::fail(kdtpl::ErrorCode::IndexError, "couplet index out of range");
        const auto& c = cs->value.couplets()[k];
        if (i) *i = c.i;
        if (l) *l = c.l;
        if (dist) *dist = c.dist;
    });
}

void kdtpl_couplets_free(kdtpl_couplets* cs) { delete cs; }

kdtpl_status kdtpl_pairing_report(const kdtpl_couplets* cs, kdtpl_pairing_summary* out) {
    return guarded([&] {
        require(cs, "couplets");
        require(out, "out");
        const auto s = kdtpl::pairing_report(cs->value);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        *out = {s.n,
                s.q,
                s.unpaired,
                s.rate,
                s.mean_dist ? 1 : 0,
                s.mean_dist.value_or(nan),
                s.max_dist.value_or(nan)};
    });
}

kdtpl_status kdtpl_fit_pl(const kdtpl_points* points, const kdtpl_couplets* cs, kdtpl_pl_fit* out) {
    return guarded([&] {
        require(points, "points");
        require(cs, "couplets");
        require(out, "out");
        const auto sample = kdtpl::extract_paired_sample(points->value, cs->value);
        if (sample.q() < 3)
            kdtpl::fail(kdtpl::ErrorCode::InsufficientCouples,
                        "need at least 3 couples, got " + std::to_string(sample.q()));
        *out = to_c(kdtpl::solve_pl(kdtpl::sufficient_statistics(sample)));
    });
}

kdtpl_status kdtpl_fit_pl_numerical(const kdtpl_points* points, const kdtpl_couplets* cs,
                                    kdtpl_pl_fit* out) {
    return guarded([&] {
        require(points, "points");
        require(cs, "couplets");
        require(out, "out");
        *out = to_c(kdtpl::numerical_pl_mle(kdtpl::extract_paired_sample(points->value, cs->value)));
    });
}

kdtpl_status kdtpl_fit_fl(const kdtpl_points* points, size_t knn, kdtpl_sem_fit* out) {
    return guarded([&] {
        require(points, "points");
        require(out, "out");
        const auto& ps = points->value;
        if (!ps.has_data())
            kdtpl::fail(kdtpl::ErrorCode::MissingData, "points carry no covariate/response");
        const auto w = kdtpl::build_knn_weights(ps, knn);
        const auto f = kdtpl::fit_sem_ml(ps.response(), ps.covariate(), w);
        *out = {f.beta, f.sigma2, f.rho, f.loglik, f.converged ? 1 : 0};
    });
}

kdtpl_mc_config kdtpl_mc_config_default(void) {
    const kdtpl::McConfig d;
    kdtpl_mc_config c{};
    c.reps = d.reps;
    c.knn = d.knn_k;
    c.base_seed = d.base_seed;
    c.run_fl = d.run_fl ? 1 : 0;
    c.workers = d.workers;
    c.fl_max_n = d.fl_max_n;
    c.fl_time_cap = d.fl_time_cap;
    c.beta = d.beta;
    c.sigma = d.sigma;
    c.domain = d.domain;
    c.scaling = KDTPL_SCALING_NN_MEAN;
    return c;
}

static kdtpl_status finish_report(kdtpl::McReport report, kdtpl_report** out) {
    const auto failed = report.failed_cells();
    *out = new kdtpl_report{std::move(report)};
    if (!failed.empty()) {
        const auto* row = failed.front();
        last_error = "all replications failed in cell phi=" + std::to_string(row->phi) +
                     " n=" + std::to_string(row->n) + " radius=" + row->radius.label();
        return KDTPL_ERR_CELL_FAILED;
    }
    return KDTPL_OK;
}

kdtpl_status kdtpl_mc_run(const kdtpl_mc_config* config, kdtpl_report** out) {
    kdtpl::McReport report;
    const auto st = guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = nullptr;
        report = kdtpl::run_montecarlo(from_c(*config, true));
    });
    if (st != KDTPL_OK) return st;
    return finish_report(std::move(report), out);
}

kdtpl_status kdtpl_buffer_sweep(const kdtpl_mc_config* config, kdtpl_report** out) {
    kdtpl::McReport report;
    const auto st = guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = nullptr;
        report = kdtpl::buffer_sweep(from_c(*config, false));
    });
    if (st != KDTPL_OK) return st;
    return finish_report(std::move(report), out);
}

size_t kdtpl_report_rows(const kdtpl_report* report) {
    return report ? report->value.rows.size() : 0;
}

kdtpl_status kdtpl_report_write_csv(const kdtpl_report* report, const char* path) {
    return guarded([&] {
        require(report, "report");
        require(path, "path");
        kdtpl::write_report_csv(report->value, path);
    });
}

kdtpl_status kdtpl_report_write_timing_csv(const kdtpl_report* report, const char* path) {
    return guarded([&] {
        require(report, "report");
        require(path, "path");
        kdtpl::write_report_timing_csv(report->value, path);
    });
}

kdtpl_status kdtpl_report_write_json(const kdtpl_report* report, const char* path) {
    return guarded([&] {
        require(report, "report");
        require(path, "path");
        kdtpl::write_report_json(report->value, path);
    });
}

void kdtpl_report_free(kdtpl_report* report) { delete report; }

kdtpl_bench_config kdtpl_bench_config_default(void) {
    const kdtpl::BenchConfig d;
    kdtpl_bench_config c{};
    c.repeats = d.repeats;
    c.seed = d.seed;
    c.phi = d.phi;
    c.knn = d.knn_k;
    c.radius = to_c(d.radius);
    c.fl_max_n = d.fl_max_n;
    return c;
}

kdtpl_status kdtpl_bench_run(const kdtpl_bench_config* config, kdtpl_timing** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = nullptr;
        kdtpl::BenchConfig cfg;
        if (config->n_count > 0) require(config->ns, "ns");
        cfg.ns.assign(config->ns, config->ns + config->n_count);
        cfg.repeats = config->repeats;
        cfg.seed = config->seed;
        cfg.phi = config->phi;
        cfg.knn_k = config->knn;
        cfg.radius = from_c(config->radius);
        cfg.fl_max_n = config->fl_max_n;
        *out = new kdtpl_timing{kdtpl::timing_benchmark(cfg)};
    });
}

kdtpl_status kdtpl_timing_slope(const kdtpl_timing* timing, const char* method, double* slope) {
    return guarded([&] {
        require(timing, "timing");
        require(slope, "slope");
        *slope = series(timing->value, method).slope;
    });
}

kdtpl_status kdtpl_timing_write_report_csv(const kdtpl_timing* timing, const char* path) {
    return guarded([&] {
        require(timing, "timing");
        require(path, "path");
        kdtpl::write_bench_report_csv(timing->value, path);
    });
}

kdtpl_status kdtpl_timing_write_csv(const kdtpl_timing* timing, const char* path) {
    return guarded([&] {
        require(timing, "timing");
        require(path, "path");
        kdtpl::write_bench_timing_csv(timing->value, path);
    });
}

kdtpl_status kdtpl_timing_write_plot_csv(const kdtpl_timing* timing, const char* method,
                                         const char* path) {
    return guarded([&] {
        require(timing, "timing");
        require(path, "path");
        kdtpl::write_plot_csv(series(timing->value, method), path);
    });
}

kdtpl_status kdtpl_timing_write_json(const kdtpl_timing* timing, const char* path) {
    return guarded([&] {
        require(timing, "timing");
        require(path, "path");
        kdtpl::write_bench_json(timing->value, path);
    });
}

void kdtpl_timing_free(kdtpl_timing* timing) { delete timing; }

} // extern "C"
