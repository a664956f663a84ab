#include "kdtpl/experiments.hpp"

#include "csv.hpp"
#include "kdtpl/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace kdtpl {

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string describe(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e))
        return std::string(error_name(err->code())) + ": " + err->what();
    return std::string("Error: ") + e.what();
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t m = a.size();
    if (m < 2) return kNaN;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(m);
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(m);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return kNaN;
    return sab / std::sqrt(saa * sbb);
}

struct PlOutcome {
    std::size_t q = 0;
    std::optional<PlFit> fit;
    std::string error;
    double resid_corr = kNaN;
    double implied_corr = kNaN;
    double pair_s = 0.0;
    double pl_s = 0.0;
};

PlOutcome estimate_pl(const Dataset& ds, double radius, double phi) {
    PlOutcome out;
    try {
        auto t0 = Clock::now();
        const CoupletSet cs = pair_points(ds.points, radius);
        out.pair_s = seconds_since(t0);
        out.q = cs.q();

        t0 = Clock::now();
        const PairedSample sample = extract_paired_sample(ds.points, cs);
        const PlFit fit = solve_pl(sufficient_statistics(sample));
        out.pl_s = seconds_since(t0);
        out.fit = fit;
        if (!fit.converged)
            out.error = "NoConvergence: fixed-point iteration stopped at psi = " +
                        csv::fmt(fit.params.psi);

        std::vector<double> ei(cs.q()), el(cs.q());
        double implied = 0.0;
        for (std::size_t k = 0; k < cs.q(); ++k) {
            ei[k] = sample.y_i[k] - fit.params.beta * sample.x_i[k];
            el[k] = sample.y_l[k] - fit.params.beta * sample.x_l[k];
            implied += std::exp(-phi * cs.couplets()[k].dist / ds.distance_scale);
        }
        out.resid_corr = pearson(ei, el);
        out.implied_corr = implied / static_cast<double>(cs.q());
    } catch (const std::exception& e) {
        out.error = describe(e);
    }
    return out;
}

struct FlOutcome {
    std::optional<SemFit> fit;
    std::string error;
    double weights_s = 0.0;
    double fl_s = 0.0;
};

FlOutcome estimate_fl(const Dataset& ds, std::size_t knn) {
    FlOutcome out;
    try {
        auto t0 = Clock::now();
        const WeightsMatrix w = build_knn_weights(ds.points, knn);
        out.weights_s = seconds_since(t0);
        t0 = Clock::now();
        out.fit = fit_sem_ml(ds.y, ds.x, w);
        out.fl_s = seconds_since(t0);
    } catch (const std::exception& e) {
        out.error = describe(e);
    }
    return out;
}

double median(std::vector<double> v) { return v.empty() ? kNaN : quantile(std::move(v), 0.5); }

DgpConfig cell_config(const McConfig& mc, double phi, std::size_t n, std::uint64_t seed) {
    DgpConfig cfg;
    cfg.n = n;
    cfg.phi = phi;
    cfg.beta = mc.beta;
    cfg.sigma = mc.sigma;
    cfg.domain = mc.domain;
    cfg.scaling = mc.scaling;
    cfg.seed = seed;
    return cfg;
}

std::optional<Metrics> metrics_or_absent(const std::vector<double>& v, double theta) {
    if (v.empty()) return std::nullopt;
    return compute_metrics(v, theta);
}

void aggregate(McRow& row, const McConfig& mc) {
    std::vector<double> beta, sigma, psi, fb, fs, fr, rc, ic, qs;
    std::vector<double> t_radius, t_pair, t_pl, t_w, t_fl;
    row.q_min = std::numeric_limits<std::size_t>::max();
    row.q_max = 0;
    for (const auto& r : row.replications) {
        qs.push_back(static_cast<double>(r.q));
        row.q_min = std::min(row.q_min, r.q);
        row.q_max = std::max(row.q_max, r.q);
        if (r.pl && r.pl_error.empty()) {
            ++row.pl_ok;
            beta.push_back(r.pl->params.beta);
            sigma.push_back(std::sqrt(r.pl->params.sigma2));
            psi.push_back(r.pl->params.psi);
            if (std::isfinite(r.resid_corr)) rc.push_back(r.resid_corr);
            if (std::isfinite(r.implied_corr)) ic.push_back(r.implied_corr);
            t_radius.push_back(r.times.radius);
            t_pair.push_back(r.times.pair);
            t_pl.push_back(r.times.pl);
        } else {
            ++row.pl_failed;
        }
        if (r.fl) {
            ++row.fl_ok;
            fb.push_back(r.fl->beta);
            fs.push_back(std::sqrt(r.fl->sigma2));
            fr.push_back(r.fl->rho);
            t_w.push_back(r.times.weights);
            t_fl.push_back(r.times.fl);
        } else if (!r.fl_skip_reason.empty()) {
            ++row.fl_skipped;
            if (row.fl_skip_reason.empty()) row.fl_skip_reason = r.fl_skip_reason;
        } else if (!r.fl_error.empty()) {
            ++row.fl_failed;
        }
    }
    if (row.replications.empty()) row.q_min = 0;
    row.q_mean = qs.empty() ? 0.0 : std::accumulate(qs.begin(), qs.end(), 0.0) / qs.size();
    row.resid_corr_ave = rc.empty() ? kNaN : std::accumulate(rc.begin(), rc.end(), 0.0) / rc.size();
    row.implied_corr_ave = ic.empty() ? kNaN : std::accumulate(ic.begin(), ic.end(), 0.0) / ic.size();
    row.psi_target = row.implied_corr_ave;

    row.beta_pl = metrics_or_absent(beta, mc.beta);
    row.sigma_pl = metrics_or_absent(sigma, mc.sigma);
    row.psi_pl = std::isfinite(row.psi_target) ? metrics_or_absent(psi, row.psi_target)
                                               : std::nullopt;
    row.beta_fl = metrics_or_absent(fb, mc.beta);
    row.sigma_fl = metrics_or_absent(fs, mc.sigma);
    row.rho_fl = metrics_or_absent(fr, 0.0);

    row.median_times = {median(t_radius), median(t_pair), median(t_pl), median(t_w), median(t_fl)};
    row.cell_failed = row.pl_ok == 0;
}

std::string opt(const std::optional<double>& v) { return v ? csv::fmt(*v) : std::string(); }
std::string num(double v) { return std::isfinite(v) ? csv::fmt(v) : std::string(); }

void metric_cells(std::ostream& out, const std::optional<Metrics>& m) {
    if (!m) {
        out << ",,,";
        return;
    }
    out << csv::fmt(m->ave) << ',' << csv::fmt(m->bias) << ',' << opt(m->rel_bias) << ','
        << csv::fmt(m->mse);
}

nlohmann::json json_num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

nlohmann::json to_json(const std::optional<Metrics>& m) {
    if (!m) return nullptr;
    return {{"count", m->count},
            {"ave", m->ave},
            {"bias", m->bias},
            {"rel_bias", m->rel_bias ? nlohmann::json(*m->rel_bias) : nlohmann::json(nullptr)},
            {"variance", m->variance},
            {"mse", m->mse}};
}

nlohmann::json to_json(const std::optional<PlFit>& f) {
    if (!f) return nullptr;
    return {{"beta", f->params.beta}, {"sigma2", f->params.sigma2}, {"psi", f->params.psi},
            {"q", f->q},           {"iterations", f->iterations}, {"converged", f->converged},
            {"loglik", json_num(f->loglik)}};
}

nlohmann::json to_json(const std::optional<SemFit>& f) {
    if (!f) return nullptr;
    return {{"beta", f->beta},
            {"sigma2", f->sigma2},
            {"rho", f->rho},
            {"loglik", json_num(f->loglik)},
            {"converged", f->converged}};
}

nlohmann::json to_json(const StageTimes& t) {
    return {{"radius", json_num(t.radius)}, {"pair", json_num(t.pair)}, {"pl", json_num(t.pl)},
            {"weights", json_num(t.weights)}, {"fl", json_num(t.fl)}};
}

void write_json_file(const nlohmann::json& j, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

TimingSeries fit_series(std::string method, std::vector<TimingPoint> points) {
    TimingSeries s;
    s.method = std::move(method);
    s.points = std::move(points);
    s.slope = s.intercept = s.residual = kNaN;
    if (s.points.size() < 2) return s;
    double mx = 0.0, my = 0.0;
    const double m = static_cast<double>(s.points.size());
    for (const auto& p : s.points) {
        mx += std::log(static_cast<double>(p.n)) / m;
        my += std::log(p.median) / m;
    }
    double sxy = 0.0, sxx = 0.0;
    for (const auto& p : s.points) {
        const double dx = std::log(static_cast<double>(p.n)) - mx;
        sxy += dx * (std::log(p.median) - my);
        sxx += dx * dx;
    }
    s.slope = sxy / sxx;
    s.intercept = my - s.slope * mx;
    double rss = 0.0;
    for (const auto& p : s.points) {
        const double e =
            std::log(p.median) - (s.intercept + s.slope * std::log(static_cast<double>(p.n)));
        rss += e * e;
    }
    s.residual = std::sqrt(rss / m);
    return s;
}

TimingPoint summarize(std::size_t n, std::vector<double> samples) {
    TimingPoint p;
    p.n = n;
    p.median = quantile(samples, 0.5);
    p.q1 = quantile(samples, 0.25);
    p.q3 = quantile(samples, 0.75);
    p.samples = std::move(samples);
    return p;
}

} // namespace

double quantile(std::vector<double> values, double p) {
    if (values.empty()) fail(ErrorCode::InvalidArgument, "quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

RepResult run_replication(const DgpConfig& cfg, const RadiusSpec& radius, bool run_fl,
                          std::size_t knn) {
    RepResult rep;
    rep.seed = cfg.seed;
    rep.resid_corr = rep.implied_corr = kNaN;
    Dataset ds;
    try {
        ds = simulate_dataset(cfg);
    } catch (const std::exception& e) {
        rep.pl_error = describe(e);
        if (run_fl) rep.fl_error = rep.pl_error;
        return rep;
    }

    try {
        const auto t0 = Clock::now();
        const double r = resolve_radius(ds.points, radius);
        rep.times.radius = seconds_since(t0);
        auto pl = estimate_pl(ds, r, cfg.phi);
        rep.q = pl.q;
        rep.pl = pl.fit;
        rep.pl_error = std::move(pl.error);
        rep.resid_corr = pl.resid_corr;
        rep.implied_corr = pl.implied_corr;
        rep.times.pair = pl.pair_s;
        rep.times.pl = pl.pl_s;
    } catch (const std::exception& e) {
        rep.pl_error = describe(e);
    }

    if (run_fl) {
        auto fl = estimate_fl(ds, knn);
        rep.fl = fl.fit;
        rep.fl_error = std::move(fl.error);
        rep.times.weights = fl.weights_s;
        rep.times.fl = fl.fl_s;
    }
    return rep;
}

Metrics compute_metrics(std::span<const double> estimates, double theta_true) {
    if (estimates.empty()) fail(ErrorCode::InvalidArgument, "no estimates to summarize");
    Metrics m;
    m.count = estimates.size();
    const double cnt = static_cast<double>(m.count);
    m.ave = std::accumulate(estimates.begin(), estimates.end(), 0.0) / cnt;
    m.bias = std::abs(theta_true - m.ave);
    if (theta_true != 0.0) m.rel_bias = m.bias / std::abs(theta_true);
    double dev = 0.0;
    for (const double e : estimates) dev += (e - m.ave) * (e - m.ave);
    m.variance = dev / cnt;
    m.mse = m.variance + m.bias * m.bias;
    return m;
}

std::vector<const McRow*> McReport::failed_cells() const {
    std::vector<const McRow*> out;
    for (const auto& r : rows)
        if (r.cell_failed) out.push_back(&r);
    return out;
}

McReport run_montecarlo(const McConfig& mc) {
    if (mc.reps < 1) fail(ErrorCode::InvalidArgument, "reps must be >= 1");
    if (mc.ns.empty() || mc.phis.empty() || mc.radius_specs.empty())
        fail(ErrorCode::InvalidArgument, "phis, ns and radius specs must be nonempty");

    McReport report;
    report.config = mc;
    const std::size_t np = mc.phis.size(), nn = mc.ns.size(), nr = mc.radius_specs.size();
    for (std::size_t pi = 0; pi < np; ++pi)
        for (std::size_t ni = 0; ni < nn; ++ni)
            for (std::size_t ri = 0; ri < nr; ++ri) {
                McRow row;
                row.phi = mc.phis[pi];
                row.n = mc.ns[ni];
                row.radius = mc.radius_specs[ri];
                row.reps = mc.reps;
                row.base_seed = mc.base_seed;
                row.replications.resize(mc.reps);
                report.rows.push_back(std::move(row));
            }
    auto row_at = [&](std::size_t pi, std::size_t ni, std::size_t ri) -> McRow& {
        return report.rows[(pi * nn + ni) * nr + ri];
    };

    std::vector<double> fl_spent(np * nn, 0.0);
    std::mutex fl_mutex;

    auto run_job = [&](std::size_t job) {
        const std::size_t rep = job % mc.reps;
        const std::size_t cell = job / mc.reps;
        const std::size_t pi = cell / nn, ni = cell % nn;
        const std::uint64_t seed = mc.base_seed + rep;
        const DgpConfig cfg = cell_config(mc, mc.phis[pi], mc.ns[ni], seed);

        std::vector<RepResult> results(nr);
        for (auto& r : results) {
            r.seed = seed;
            r.resid_corr = r.implied_corr = kNaN;
        }
        auto store = [&] {
            for (std::size_t ri = 0; ri < nr; ++ri)
                row_at(pi, ni, ri).replications[rep] = std::move(results[ri]);
        };

        Dataset ds;
        DistanceSummary summary;
        double radius_s = 0.0;
        try {
            ds = simulate_dataset(cfg);
            const auto t0 = Clock::now();
            summary = distance_summary(ds.points, DistanceMode::automatic(ds.points.size()));
            radius_s = seconds_since(t0);
        } catch (const std::exception& e) {
            for (auto& r : results) {
                r.pl_error = describe(e);
                if (mc.run_fl) r.fl_error = r.pl_error;
            }
            store();
            return;
        }

        FlOutcome fl;
        std::string skip;
        if (mc.run_fl) {
            bool capped = false;
            if (mc.fl_time_cap > 0.0) {
                std::lock_guard lock(fl_mutex);
                capped = fl_spent[cell] >= mc.fl_time_cap;
            }
            if (cfg.n > mc.fl_max_n)
                skip = "n exceeds fl_max_n = " + std::to_string(mc.fl_max_n);
            else if (capped)
                skip = "FL wall-clock cap of " + csv::fmt(mc.fl_time_cap) + " s reached";
            else {
                fl = estimate_fl(ds, mc.knn_k);
                std::lock_guard lock(fl_mutex);
                fl_spent[cell] += fl.weights_s + fl.fl_s;
            }
        }

        for (std::size_t ri = 0; ri < nr; ++ri) {
            RepResult& r = results[ri];
            r.times.radius = radius_s;
            try {
                const double radius = resolve_radius(summary, mc.radius_specs[ri]);
                auto pl = estimate_pl(ds, radius, cfg.phi);
                r.q = pl.q;
                r.pl = pl.fit;
                r.pl_error = std::move(pl.error);
                r.resid_corr = pl.resid_corr;
                r.implied_corr = pl.implied_corr;
                r.times.pair = pl.pair_s;
                r.times.pl = pl.pl_s;
            } catch (const std::exception& e) {
                r.pl_error = describe(e);
            }
            if (mc.run_fl) {
                r.fl = fl.fit;
                r.fl_error = fl.error;
                r.fl_skip_reason = skip;
                r.times.weights = fl.weights_s;
                r.times.fl = fl.fl_s;
            }
        }
        store();
    };

    const std::size_t jobs = np * nn * mc.reps;
    const std::size_t workers = std::clamp<std::size_t>(mc.workers, 1, jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs; j = next++) run_job(j);
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    for (auto& row : report.rows) aggregate(row, mc);
    return report;
}

std::vector<RadiusSpec> buffer_radius_specs() {
    std::vector<RadiusSpec> specs{RadiusSpec::mean(), RadiusSpec::max()};
    for (double h : {50.0, 200.0, 350.0, 500.0, 650.0, 800.0})
        specs.push_back(RadiusSpec::mean_plus(h));
    return specs;
}

McReport buffer_sweep(McConfig mc) {
    mc.radius_specs = buffer_radius_specs();
    return run_montecarlo(mc);
}

void write_report_csv(const McReport& report, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "phi,n,radius,reps,pl_ok,pl_failed,q_mean,q_min,q_max,"
           "beta_pl_ave,beta_pl_bias,beta_pl_rb,beta_pl_mse,"
           "sigma_pl_ave,sigma_pl_bias,sigma_pl_rb,sigma_pl_mse,"
           "psi_pl_ave,psi_pl_bias,psi_pl_rb,psi_pl_mse,psi_target,"
           "fl_ok,fl_failed,fl_skipped,"
           "beta_fl_ave,beta_fl_bias,beta_fl_rb,beta_fl_mse,"
           "sigma_fl_ave,sigma_fl_bias,sigma_fl_rb,sigma_fl_mse,"
           "rho_fl_ave,rho_fl_bias,rho_fl_rb,rho_fl_mse,"
           "resid_corr_ave,implied_corr_ave,knn,base_seed,status\n";
    for (const auto& r : report.rows) {
        out << csv::fmt(r.phi) << ',' << r.n << ',' << r.radius.label() << ',' << r.reps << ','
            << r.pl_ok << ',' << r.pl_failed << ',' << csv::fmt(r.q_mean) << ',' << r.q_min << ','
            << r.q_max << ',';
        metric_cells(out, r.beta_pl);
        out << ',';
        metric_cells(out, r.sigma_pl);
        out << ',';
        metric_cells(out, r.psi_pl);
        out << ',' << num(r.psi_target) << ',' << r.fl_ok << ',' << r.fl_failed << ','
            << r.fl_skipped << ',';
        metric_cells(out, r.beta_fl);
        out << ',';
        metric_cells(out, r.sigma_fl);
        out << ',';
        metric_cells(out, r.rho_fl);
        out << ',' << num(r.resid_corr_ave) << ',' << num(r.implied_corr_ave) << ','
            << report.config.knn_k << ',' << r.base_seed << ','
            << (r.cell_failed ? "CellFailed" : "ok") << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

void write_report_timing_csv(const McReport& report, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "phi,n,radius,radius_s,pair_s,pl_s,weights_s,fl_s\n";
    for (const auto& r : report.rows) {
        const auto& t = r.median_times;
        out << csv::fmt(r.phi) << ',' << r.n << ',' << r.radius.label() << ',' << num(t.radius)
            << ',' << num(t.pair) << ',' << num(t.pl) << ',' << num(t.weights) << ','
            << num(t.fl) << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

void write_report_json(const McReport& report, const std::filesystem::path& path) {
    const auto& c = report.config;
    nlohmann::json radii = nlohmann::json::array();
    for (const auto& r : c.radius_specs) radii.push_back(r.label());
    nlohmann::json j;
    j["config"] = {{"phis", c.phis},
                   {"ns", c.ns},
                   {"reps", c.reps},
                   {"radius_specs", radii},
                   {"knn", c.knn_k},
                   {"base_seed", c.base_seed},
                   {"run_fl", c.run_fl},
                   {"workers", c.workers},
                   {"fl_max_n", c.fl_max_n},
                   {"fl_time_cap", c.fl_time_cap},
                   {"beta", c.beta},
                   {"sigma", c.sigma},
                   {"domain", c.domain},
                   {"scaling", std::string(scaling_name(c.scaling))}};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json reps = nlohmann::json::array();
        for (const auto& rep : r.replications)
            reps.push_back({{"seed", rep.seed},
                            {"q", rep.q},
                            {"pl", to_json(rep.pl)},
                            {"pl_error", rep.pl_error},
                            {"fl", to_json(rep.fl)},
                            {"fl_error", rep.fl_error},
                            {"fl_skip_reason", rep.fl_skip_reason},
                            {"resid_corr", json_num(rep.resid_corr)},
                            {"implied_corr", json_num(rep.implied_corr)},
                            {"times", to_json(rep.times)}});
        rows.push_back({{"phi", r.phi},
                        {"n", r.n},
                        {"radius", r.radius.label()},
                        {"reps", r.reps},
                        {"status", r.cell_failed ? "CellFailed" : "ok"},
                        {"pl_ok", r.pl_ok},
                        {"pl_failed", r.pl_failed},
                        {"q_mean", r.q_mean},
                        {"q_min", r.q_min},
                        {"q_max", r.q_max},
                        {"beta_pl", to_json(r.beta_pl)},
                        {"sigma_pl", to_json(r.sigma_pl)},
                        {"psi_pl", to_json(r.psi_pl)},
                        {"psi_target", json_num(r.psi_target)},
                        {"fl_ok", r.fl_ok},
                        {"fl_failed", r.fl_failed},
                        {"fl_skipped", r.fl_skipped},
                        {"fl_skip_reason", r.fl_skip_reason},
                        {"beta_fl", to_json(r.beta_fl)},
                        {"sigma_fl", to_json(r.sigma_fl)},
                        {"rho_fl", to_json(r.rho_fl)},
                        {"resid_corr_ave", json_num(r.resid_corr_ave)},
                        {"implied_corr_ave", json_num(r.implied_corr_ave)},
                        {"median_times", to_json(r.median_times)},
                        {"base_seed", r.base_seed},
                        {"replications", std::move(reps)}});
    }
    j["rows"] = std::move(rows);
    write_json_file(j, path);
}

TimingReport timing_benchmark(const BenchConfig& cfg) {
    if (!std::is_sorted(cfg.ns.begin(), cfg.ns.end()))
        fail(ErrorCode::InvalidArgument, "benchmark sizes must be ascending");
    if (cfg.repeats < 3) fail(ErrorCode::InvalidArgument, "benchmark needs repeats >= 3");

    TimingReport report;
    report.config = cfg;
    std::vector<TimingPoint> pl_points, fl_points, radius_points;

    for (const std::size_t n : cfg.ns) {
        DgpConfig dgp;
        dgp.n = n;
        dgp.phi = cfg.phi;
        dgp.seed = cfg.seed;
        const Dataset ds = simulate_dataset(dgp);

        BenchRow row;
        row.n = n;
        std::vector<double> radius_t, pl_t, fl_t;
        for (std::size_t r = 0; r <= cfg.repeats; ++r) {
            const auto t0 = Clock::now();
            row.radius = resolve_radius(ds.points, cfg.radius);
            const double dt = seconds_since(t0);
            if (r > 0) radius_t.push_back(dt);
        }
        for (std::size_t r = 0; r <= cfg.repeats; ++r) {
            const auto t0 = Clock::now();
            const CoupletSet cs = pair_points(ds.points, row.radius);
            const PlFit fit = solve_pl(sufficient_statistics(extract_paired_sample(ds.points, cs)));
            const double dt = seconds_since(t0);
            if (r > 0) pl_t.push_back(dt);
            row.q = cs.q();
            row.pl = fit;
        }
        if (n <= cfg.fl_max_n) {
            for (std::size_t r = 0; r <= cfg.repeats; ++r) {
                const auto t0 = Clock::now();
                const WeightsMatrix w = build_knn_weights(ds.points, cfg.knn_k);
                const SemFit fit = fit_sem_ml(ds.y, ds.x, w);
                const double dt = seconds_since(t0);
                if (r > 0) fl_t.push_back(dt);
                row.fl = fit;
            }
            fl_points.push_back(summarize(n, std::move(fl_t)));
        }
        radius_points.push_back(summarize(n, std::move(radius_t)));
        pl_points.push_back(summarize(n, std::move(pl_t)));
        report.rows.push_back(std::move(row));
    }
    report.pl = fit_series("pl", std::move(pl_points));
    report.fl = fit_series("fl", std::move(fl_points));
    report.radius = fit_series("radius", std::move(radius_points));
    return report;
}

void write_bench_report_csv(const TimingReport& report, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "n,seed,radius,q,beta_pl,sigma2_pl,psi_pl,beta_fl,sigma2_fl,rho_fl\n";
    for (const auto& r : report.rows) {
        out << r.n << ',' << report.config.seed << ',' << csv::fmt(r.radius) << ',' << r.q << ',';
        if (r.pl)
            out << csv::fmt(r.pl->params.beta) << ',' << csv::fmt(r.pl->params.sigma2) << ','
                << csv::fmt(r.pl->params.psi) << ',';
        else
            out << ",,,";
        if (r.fl)
            out << csv::fmt(r.fl->beta) << ',' << csv::fmt(r.fl->sigma2) << ','
                << csv::fmt(r.fl->rho);
        else
            out << ",,";
        out << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

void write_bench_timing_csv(const TimingReport& report, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "method,n,median_s,q1_s,q3_s\n";
    for (const auto* s : {&report.pl, &report.fl, &report.radius})
        for (const auto& p : s->points)
            out << s->method << ',' << p.n << ',' << csv::fmt(p.median) << ',' << csv::fmt(p.q1)
                << ',' << csv::fmt(p.q3) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

void write_plot_csv(const TimingSeries& series, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "n,seconds\n";
    for (const auto& p : series.points) out << p.n << ',' << csv::fmt(p.median) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

void write_bench_json(const TimingReport& report, const std::filesystem::path& path) {
    auto series = [](const TimingSeries& s) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : s.points)
            pts.push_back({{"n", p.n}, {"median", p.median}, {"q1", p.q1}, {"q3", p.q3},
                           {"samples", p.samples}});
        return nlohmann::json{{"method", s.method},
                              {"slope", json_num(s.slope)},
                              {"intercept", json_num(s.intercept)},
                              {"residual", json_num(s.residual)},
                              {"points", pts}};
    };
    const auto& c = report.config;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"n", r.n}, {"radius", r.radius}, {"q", r.q}, {"pl", to_json(r.pl)},
                        {"fl", to_json(r.fl)}});
    nlohmann::json j{{"config",
                      {{"ns", c.ns},
                       {"repeats", c.repeats},
                       {"seed", c.seed},
                       {"phi", c.phi},
                       {"knn", c.knn_k},
                       {"radius", c.radius.label()},
                       {"fl_max_n", c.fl_max_n}}},
                     {"pl", series(report.pl)},
                     {"fl", series(report.fl)},
                     {"radius", series(report.radius)},
                     {"rows", rows}};
    write_json_file(j, path);
}

} // namespace kdtpl
