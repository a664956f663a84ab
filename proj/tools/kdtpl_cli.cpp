// Command-line front end. Talks to the library only through the C API.

#include "kdtpl/kdtpl.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { Error, Warn, Info, Debug };
LogLevel g_log_level = LogLevel::Warn;

void log(LogLevel level, const std::string& msg) {
    static const char* names[] = {"error", "warn", "info", "debug"};
    if (level <= g_log_level) std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// Domain failure reported by the library.
struct ApiError : std::runtime_error {
    kdtpl_status status;
    ApiError(kdtpl_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

void check(kdtpl_status st) {
    if (st != KDTPL_OK) throw ApiError(st, kdtpl_last_error());
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using Points = std::unique_ptr<kdtpl_points, Deleter<kdtpl_points, kdtpl_points_free>>;
using Couplets = std::unique_ptr<kdtpl_couplets, Deleter<kdtpl_couplets, kdtpl_couplets_free>>;
using Report = std::unique_ptr<kdtpl_report, Deleter<kdtpl_report, kdtpl_report_free>>;
using Timing = std::unique_ptr<kdtpl_timing, Deleter<kdtpl_timing, kdtpl_timing_free>>;

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ApiError(KDTPL_ERR_IO, "cannot read " + path.string());
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::string hex;
    static const char* digits = "0123456789abcdef";
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(digits[md[i] >> 4]);
        hex.push_back(digits[md[i] & 0xf]);
    }
    return hex;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

struct Output {
    fs::path path;
    bool deterministic = true;
};

// ---- option sets -----------------------------------------------------------

struct SimulateOpts {
    std::size_t n = 200;
    double phi = 1.0, beta = 1.0, sigma = 1.0, domain = 1000.0;
    std::string scaling = "nn-mean";
    std::uint64_t seed = 0;
    std::string out;
};

struct PairOpts {
    std::string in, out, unpaired_out, radius = "mean", order = "ascending";
    std::uint64_t order_seed = 0;
    double min_separation = 0.0;
};

struct FitPlOpts {
    std::string points, couplets, out, method = "closed";
};

struct FitFlOpts {
    std::string in, out;
    std::size_t knn = 5;
};

struct McOpts {
    std::uint64_t seed = 0;
    std::vector<double> phis{0.8, 1.0};
    std::vector<std::size_t> ns{200, 800, 1800, 5000};
    std::size_t reps = 100;
    std::vector<std::string> radius{"mean"};
    std::size_t knn = 5;
    bool fl = true;
    std::size_t fl_max_n = 5000;
    double fl_time_cap = 0.0;
    double beta = 1.0, sigma = 1.0, domain = 1000.0;
    std::string scaling = "nn-mean";
    std::string out_dir;
};

struct BenchOpts {
    std::uint64_t seed = 0;
    std::vector<std::size_t> ns{500, 1000, 2000, 4000};
    std::size_t repeats = 5;
    double phi = 1.0;
    std::size_t knn = 5;
    std::string radius = "mean";
    std::size_t fl_max_n = 5000;
    std::string out_dir;
};

// Every long option of a subcommand with its resolved (given or default) value.
json resolved_options(const CLI::App* sub) {
    json opts = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = opt->get_single_name();
        if (name.empty() || name == "help" || name == "config") continue;
        std::vector<std::string> vals = opt->results();
        if (vals.empty() && !opt->get_default_str().empty()) vals = {opt->get_default_str()};
        if (opt->get_expected_max() > 1) {
            // Vector options echo their defaults as "[a,b]".
            if (vals.size() == 1 && vals[0].size() > 1 && vals[0].front() == '[') {
                std::string inner = vals[0].substr(1, vals[0].size() - 2);
                vals.clear();
                std::stringstream ss(inner);
                for (std::string item; std::getline(ss, item, ',');) vals.push_back(item);
            }
            opts[name] = vals;
        } else {
            opts[name] = vals.empty() ? json(nullptr) : json(vals.front());
        }
    }
    return opts;
}

kdtpl_scaling parse_scaling(const std::string& s) {
    kdtpl_scaling out{};
    check(kdtpl_parse_scaling(s.c_str(), &out));
    return out;
}

kdtpl_radius_spec parse_radius(const std::string& s) {
    kdtpl_radius_spec out{};
    check(kdtpl_radius_parse(s.c_str(), &out));
    return out;
}

// ---- subcommand bodies -------------------------------------------------------

std::vector<Output> run_simulate(const SimulateOpts& o) {
    kdtpl_dgp_config cfg = kdtpl_dgp_config_default();
    cfg.n = o.n;
    cfg.phi = o.phi;
    cfg.beta = o.beta;
    cfg.sigma = o.sigma;
    cfg.domain = o.domain;
    cfg.scaling = parse_scaling(o.scaling);
    cfg.seed = o.seed;
    kdtpl_points* raw = nullptr;
    check(kdtpl_simulate(&cfg, &raw));
    Points pts(raw);
    ensure_parent(o.out);
    check(kdtpl_points_write_csv(pts.get(), o.out.c_str()));
    return {{o.out}};
}

std::vector<Output> run_pair(const PairOpts& o) {
    kdtpl_points* raw = nullptr;
    check(kdtpl_points_read_csv(o.in.c_str(), &raw));
    Points pts(raw);
    double radius = 0.0;
    check(kdtpl_resolve_radius(pts.get(), parse_radius(o.radius), &radius));
    log(LogLevel::Info, "resolved radius " + fmt(radius));

    kdtpl_pair_options opts{};
    if (o.order == "shuffled") {
        opts.shuffle = 1;
        opts.shuffle_seed = o.order_seed;
    } else if (o.order != "ascending") {
        throw ApiError(KDTPL_ERR_INVALID_ARGUMENT, "order must be ascending or shuffled");
    }
    opts.min_separation = o.min_separation;

    kdtpl_couplets* rc = nullptr;
    check(kdtpl_pair(pts.get(), radius, &opts, &rc));
    Couplets cs(rc);
    kdtpl_pairing_summary s{};
    check(kdtpl_pairing_report(cs.get(), &s));
    if (s.unpaired > 0)
        log(LogLevel::Warn, std::to_string(s.unpaired) + " of " + std::to_string(s.n) +
                                " points left unpaired and dropped from estimation");
    log(LogLevel::Info, "q = " + std::to_string(s.q) + ", pairing rate " + fmt(s.rate));

    fs::path unpaired = o.unpaired_out;
    if (unpaired.empty()) {
        const fs::path out(o.out);
        unpaired = out.parent_path() / (out.stem().string() + "_unpaired.csv");
    }
    ensure_parent(o.out);
    ensure_parent(unpaired);
    check(kdtpl_couplets_write_csv(cs.get(), o.out.c_str()));
    check(kdtpl_couplets_write_unpaired_csv(cs.get(), unpaired.c_str()));
    return {{o.out}, {unpaired}};
}

std::vector<Output> run_fit_pl(const FitPlOpts& o) {
    kdtpl_points* rp = nullptr;
    check(kdtpl_points_read_csv(o.points.c_str(), &rp));
    Points pts(rp);
    kdtpl_couplets* rc = nullptr;
    check(kdtpl_couplets_read_csv(o.couplets.c_str(), kdtpl_points_size(pts.get()), &rc));
    Couplets cs(rc);
    kdtpl_pl_fit fit{};
    if (o.method == "closed")
        check(kdtpl_fit_pl(pts.get(), cs.get(), &fit));
    else if (o.method == "numerical")
        check(kdtpl_fit_pl_numerical(pts.get(), cs.get(), &fit));
    else
        throw ApiError(KDTPL_ERR_INVALID_ARGUMENT, "method must be closed or numerical");
    if (!fit.converged) log(LogLevel::Warn, "PL iteration did not converge");

    ensure_parent(o.out);
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw ApiError(KDTPL_ERR_IO, "cannot write " + o.out);
    out << "beta,sigma2,psi,q,converged,iterations,loglik\n"
        << fmt(fit.beta) << ',' << fmt(fit.sigma2) << ',' << fmt(fit.psi) << ',' << fit.q << ','
        << fit.converged << ',' << fit.iterations << ',' << fmt(fit.loglik) << '\n';
    return {{o.out}};
}

std::vector<Output> run_fit_fl(const FitFlOpts& o) {
    kdtpl_points* rp = nullptr;
    check(kdtpl_points_read_csv(o.in.c_str(), &rp));
    Points pts(rp);
    kdtpl_sem_fit fit{};
    check(kdtpl_fit_fl(pts.get(), o.knn, &fit));
    ensure_parent(o.out);
    std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
    if (!out) throw ApiError(KDTPL_ERR_IO, "cannot write " + o.out);
    out << "beta,sigma2,rho,loglik,converged\n"
        << fmt(fit.beta) << ',' << fmt(fit.sigma2) << ',' << fmt(fit.rho) << ','
        << fmt(fit.loglik) << ',' << fit.converged << '\n';
    return {{o.out}};
}

std::vector<Output> run_mc(const McOpts& o, std::size_t workers, bool buffers) {
    std::vector<kdtpl_radius_spec> radii;
    for (const auto& r : o.radius) radii.push_back(parse_radius(r));
    kdtpl_mc_config cfg = kdtpl_mc_config_default();
    cfg.phis = o.phis.data();
    cfg.phi_count = o.phis.size();
    cfg.ns = o.ns.data();
    cfg.n_count = o.ns.size();
    cfg.reps = o.reps;
    cfg.radii = radii.data();
    cfg.radius_count = radii.size();
    cfg.knn = o.knn;
    cfg.base_seed = o.seed;
    cfg.run_fl = o.fl ? 1 : 0;
    cfg.workers = workers;
    cfg.fl_max_n = o.fl_max_n;
    cfg.fl_time_cap = o.fl_time_cap;
    cfg.beta = o.beta;
    cfg.sigma = o.sigma;
    cfg.domain = o.domain;
    cfg.scaling = parse_scaling(o.scaling);

    kdtpl_report* raw = nullptr;
    const kdtpl_status st = buffers ? kdtpl_buffer_sweep(&cfg, &raw) : kdtpl_mc_run(&cfg, &raw);
    Report report(raw);
    const std::string err = st == KDTPL_OK ? "" : kdtpl_last_error();
    if (!report) check(st);

    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    const fs::path csv = dir / "report.csv", timing = dir / "report_timing.csv", js = dir / "report.json";
    check(kdtpl_report_write_csv(report.get(), csv.c_str()));
    check(kdtpl_report_write_timing_csv(report.get(), timing.c_str()));
    check(kdtpl_report_write_json(report.get(), js.c_str()));
    log(LogLevel::Info, std::to_string(kdtpl_report_rows(report.get())) + " report rows written");
    std::vector<Output> outs{{csv}, {timing, false}, {js, false}};
    if (st != KDTPL_OK) throw ApiError(st, err);
    return outs;
}

std::vector<Output> run_bench(const BenchOpts& o) {
    kdtpl_bench_config cfg = kdtpl_bench_config_default();
    cfg.ns = o.ns.data();
    cfg.n_count = o.ns.size();
    cfg.repeats = o.repeats;
    cfg.seed = o.seed;
    cfg.phi = o.phi;
    cfg.knn = o.knn;
    cfg.radius = parse_radius(o.radius);
    cfg.fl_max_n = o.fl_max_n;
    kdtpl_timing* raw = nullptr;
    check(kdtpl_bench_run(&cfg, &raw));
    Timing t(raw);

    const fs::path dir(o.out_dir);
    fs::create_directories(dir);
    const fs::path report = dir / "bench_report.csv", timing = dir / "bench_timing.csv",
                   pl = dir / "bench_pl.csv", fl = dir / "bench_fl.csv", js = dir / "bench.json";
    check(kdtpl_timing_write_report_csv(t.get(), report.c_str()));
    check(kdtpl_timing_write_csv(t.get(), timing.c_str()));
    check(kdtpl_timing_write_plot_csv(t.get(), "pl", pl.c_str()));
    check(kdtpl_timing_write_plot_csv(t.get(), "fl", fl.c_str()));
    check(kdtpl_timing_write_json(t.get(), js.c_str()));
    double spl = 0.0, sfl = 0.0;
    check(kdtpl_timing_slope(t.get(), "pl", &spl));
    check(kdtpl_timing_slope(t.get(), "fl", &sfl));
    log(LogLevel::Info, "log-log slope: pl " + fmt(spl) + ", fl " + fmt(sfl));
    return {{report}, {timing, false}, {pl, false}, {fl, false}, {js, false}};
}

void write_manifest(const fs::path& path, const json& resolved, const std::vector<Output>& outs) {
    json outputs = json::array();
    for (const auto& o : outs)
        outputs.push_back({{"path", o.path.string()},
                           {"sha256", sha256_file(o.path)},
                           {"deterministic", o.deterministic}});
    json m = resolved;
    m["outputs"] = outputs;
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ApiError(KDTPL_ERR_IO, "cannot write " + path.string());
    out << m.dump(2) << '\n';
}

int usage_error(const CLI::App& app, const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
}

void report_failure(kdtpl_status st, const std::string& message) {
    std::cerr << json{{"error", kdtpl_status_name(st)}, {"message", message}}.dump() << '\n';
}

int run_cli(int argc, char** argv);

// Rebuilds the command line recorded in a manifest, runs it and compares the
// digests of its deterministic outputs.
int replay(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw ApiError(KDTPL_ERR_IO, "cannot read " + manifest_path);
    const json m = json::parse(in);
    std::vector<std::string> args{
        "kdtpl",
        "--workers",
        std::to_string(m.at("workers").get<std::size_t>()),
        "--manifest-out",
        (fs::path(manifest_path).parent_path() / "replay-manifest.json").string(),
        m.at("subcommand").get<std::string>()};
    for (const auto& [key, val] : m.at("options").items()) {
        if (val.is_null()) continue;
        if (val.is_array()) {
            if (val.empty()) continue;
            args.push_back("--" + key);
            for (const auto& v : val) args.push_back(v.get<std::string>());
        } else {
            args.push_back("--" + key);
            args.push_back(val.get<std::string>());
        }
    }
    std::vector<char*> cargv;
    for (auto& a : args) cargv.push_back(a.data());
    const int rc = run_cli(static_cast<int>(cargv.size()), cargv.data());
    if (rc != 0) return rc;

    int mismatches = 0;
    for (const auto& o : m.at("outputs")) {
        if (!o.at("deterministic").get<bool>()) continue;
        const std::string p = o.at("path").get<std::string>();
        if (sha256_file(p) != o.at("sha256").get<std::string>()) {
            std::cerr << "digest mismatch: " << p << '\n';
            ++mismatches;
        }
    }
    if (mismatches) {
        report_failure(KDTPL_ERR_INTERNAL, std::to_string(mismatches) + " output digest(s) differ");
        return 1;
    }
    log(LogLevel::Info, "all deterministic outputs reproduced");
    return 0;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"KD-tree pairwise likelihood for spatial error models", "kdtpl"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML file with option values (flags take precedence)");
    app.allow_config_extras(false);
    app.set_version_flag("--version", std::string(kdtpl_version()));

    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    std::string log_level = "warn";
    std::string manifest;
    app.add_option("--workers", workers, "Worker threads for mc/buffers")->capture_default_str();
    app.add_option("--log-level", log_level, "error|warn|info|debug")
        ->capture_default_str()
        ->check(CLI::IsMember({"error", "warn", "info", "debug"}));
    app.add_option("--manifest-out", manifest,
                   "Manifest path (default: run-manifest.json beside the outputs)");

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "Simulate an exponential-correlation dataset");
    c_sim->add_option("--n", sim.n, "Sample size")->capture_default_str();
    c_sim->add_option("--phi", sim.phi, "Distance decay")->capture_default_str();
    c_sim->add_option("--beta", sim.beta, "True coefficient")->capture_default_str();
    c_sim->add_option("--sigma", sim.sigma, "Error scale")->capture_default_str();
    c_sim->add_option("--domain", sim.domain, "Square side length")->capture_default_str();
    c_sim->add_option("--scaling", sim.scaling, "nn-mean|mean|max|none")->capture_default_str();
    c_sim->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
    c_sim->add_option("--out", sim.out, "Points CSV")->required();

    PairOpts pair;
    auto* c_pair = app.add_subcommand("pair", "Greedy KD-tree coupling");
    c_pair->add_option("--in", pair.in, "Points CSV")->required();
    c_pair->add_option("--radius", pair.radius, "mean|max|mean+H|<number>")->capture_default_str();
    c_pair->add_option("--out", pair.out, "Couplets CSV")->required();
    c_pair->add_option("--unpaired-out", pair.unpaired_out, "Unpaired ids CSV");
    c_pair->add_option("--order", pair.order, "ascending|shuffled")->capture_default_str();
    c_pair->add_option("--order-seed", pair.order_seed, "Seed for shuffled order")
        ->capture_default_str();
    c_pair->add_option("--min-separation", pair.min_separation,
                       "Drop couplets closer than this to an earlier couplet (0 = off)")
        ->capture_default_str();

    FitPlOpts fpl;
    auto* c_fpl = app.add_subcommand("fit-pl", "Pairwise-likelihood fit");
    c_fpl->add_option("--points", fpl.points, "Points CSV with x_cov,y_resp")->required();
    c_fpl->add_option("--couplets", fpl.couplets, "Couplets CSV")->required();
    c_fpl->add_option("--out", fpl.out, "Fit CSV")->required();
    c_fpl->add_option("--method", fpl.method, "closed|numerical")->capture_default_str();

    FitFlOpts ffl;
    auto* c_ffl = app.add_subcommand("fit-fl", "Full-likelihood SEM fit");
    c_ffl->add_option("--in", ffl.in, "Points CSV with x_cov,y_resp")->required();
    c_ffl->add_option("--knn", ffl.knn, "Neighbors for the weights matrix")->capture_default_str();
    c_ffl->add_option("--out", ffl.out, "Fit CSV")->required();

    McOpts mc, buf;
    auto add_mc = [](CLI::App* c, McOpts& o, bool with_radius) {
        c->add_option("--seed", o.seed, "Base seed; replication r uses seed + r")->required();
        c->add_option("--phis", o.phis, "Distance decay values")->delimiter(',')->capture_default_str();
        c->add_option("--ns", o.ns, "Sample sizes")->delimiter(',')->capture_default_str();
        c->add_option("--reps", o.reps, "Replications per cell")->capture_default_str();
        if (with_radius)
            c->add_option("--radius", o.radius, "Radius specs")->delimiter(',')->capture_default_str();
        c->add_option("--knn", o.knn, "FL weights neighbors")->capture_default_str();
        c->add_option("--fl", o.fl, "Run the full-likelihood baseline")->capture_default_str();
        c->add_option("--fl-max-n", o.fl_max_n, "Largest n for FL")->capture_default_str();
        c->add_option("--fl-time-cap", o.fl_time_cap, "FL seconds per (phi,n); 0 = none")
            ->capture_default_str();
        c->add_option("--beta", o.beta, "True coefficient")->capture_default_str();
        c->add_option("--sigma", o.sigma, "Error scale")->capture_default_str();
        c->add_option("--domain", o.domain, "Square side length")->capture_default_str();
        c->add_option("--scaling", o.scaling, "nn-mean|mean|max|none")->capture_default_str();
        c->add_option("--out-dir", o.out_dir, "Output directory")->required();
    };
    auto* c_mc = app.add_subcommand("mc", "Monte Carlo accuracy study");
    add_mc(c_mc, mc, true);
    auto* c_buf = app.add_subcommand("buffers", "Monte Carlo over mean, max and buffered radii");
    add_mc(c_buf, buf, false);

    BenchOpts bench;
    auto* c_bench = app.add_subcommand("bench", "PL vs FL wall-clock scaling");
    c_bench->add_option("--seed", bench.seed, "Dataset seed")->required();
    c_bench->add_option("--ns", bench.ns, "Ascending sample sizes")->delimiter(',')->capture_default_str();
    c_bench->add_option("--repeats", bench.repeats, "Timed repeats (>= 3)")->capture_default_str();
    c_bench->add_option("--phi", bench.phi, "Distance decay")->capture_default_str();
    c_bench->add_option("--knn", bench.knn, "FL weights neighbors")->capture_default_str();
    c_bench->add_option("--radius", bench.radius, "Radius spec")->capture_default_str();
    c_bench->add_option("--fl-max-n", bench.fl_max_n, "Largest n for FL")->capture_default_str();
    c_bench->add_option("--out-dir", bench.out_dir, "Output directory")->required();

    std::string replay_path;
    auto* c_replay = app.add_subcommand("replay", "Re-run a manifest and verify its digests");
    c_replay->add_option("--manifest", replay_path, "run-manifest.json")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return usage_error(app, e);
    }

    g_log_level = log_level == "error" ? LogLevel::Error
                : log_level == "warn"  ? LogLevel::Warn
                : log_level == "info"  ? LogLevel::Info
                                       : LogLevel::Debug;

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (sub == c_replay) return replay(replay_path);

        json resolved{{"subcommand", sub->get_name()},
                      {"version", kdtpl_version()},
                      {"workers", workers},
                      {"log_level", log_level},
                      {"options", resolved_options(sub)}};
        std::cout << resolved.dump() << std::endl;

        std::vector<Output> outs;
        fs::path manifest_dir;
        if (sub == c_sim) {
            outs = run_simulate(sim);
            manifest_dir = fs::path(sim.out).parent_path();
        } else if (sub == c_pair) {
            outs = run_pair(pair);
            manifest_dir = fs::path(pair.out).parent_path();
        } else if (sub == c_fpl) {
            outs = run_fit_pl(fpl);
            manifest_dir = fs::path(fpl.out).parent_path();
        } else if (sub == c_ffl) {
            outs = run_fit_fl(ffl);
            manifest_dir = fs::path(ffl.out).parent_path();
        } else if (sub == c_mc) {
            outs = run_mc(mc, workers, false);
            manifest_dir = mc.out_dir;
        } else if (sub == c_buf) {
            outs = run_mc(buf, workers, true);
            manifest_dir = buf.out_dir;
        } else if (sub == c_bench) {
            outs = run_bench(bench);
            manifest_dir = bench.out_dir;
        }
        const fs::path mpath = manifest.empty() ? manifest_dir / "run-manifest.json" : fs::path(manifest);
        write_manifest(mpath, resolved, outs);
        return 0;
    } catch (const ApiError& e) {
        report_failure(e.status, e.what());
        return 1;
    } catch (const std::exception& e) {
        report_failure(KDTPL_ERR_IO, e.what());
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) { return run_cli(argc, argv); }
