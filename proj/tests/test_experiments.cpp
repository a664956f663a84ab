#include "catch2/catch_amalgamated.hpp"

#include "kdtpl/experiments.hpp"
#include "support.hpp"

#include <cmath>

using namespace kdtpl;
using Catch::Approx;

namespace {

McConfig small_config() {
    McConfig mc;
    mc.phis = {0.8, 1.0};
    mc.ns = {60, 120};
    mc.reps = 4;
    mc.base_seed = 500;
    mc.knn_k = 5;
    return mc;
}

void same_estimates(const McRow& a, const McRow& b) {
    REQUIRE(a.replications.size() == b.replications.size());
    for (std::size_t k = 0; k < a.replications.size(); ++k) {
        const auto& x = a.replications[k];
        const auto& y = b.replications[k];
        CHECK(x.seed == y.seed);
        CHECK(x.q == y.q);
        REQUIRE(x.pl.has_value() == y.pl.has_value());
        if (x.pl) {
            CHECK(x.pl->params.beta == y.pl->params.beta);
            CHECK(x.pl->params.sigma2 == y.pl->params.sigma2);
            CHECK(x.pl->params.psi == y.pl->params.psi);
        }
        REQUIRE(x.fl.has_value() == y.fl.has_value());
        if (x.fl) {
            CHECK(x.fl->beta == y.fl->beta);
            CHECK(x.fl->rho == y.fl->rho);
        }
    }
    CHECK(a.beta_pl->ave == b.beta_pl->ave);
    CHECK(a.beta_pl->mse == b.beta_pl->mse);
}

} // namespace

TEST_CASE("metrics by hand", "[experiments]") {
    const std::vector<double> same{1.0, 1.0, 1.0};
    const auto m = compute_metrics(same, 1.0);
    CHECK(m.bias == 0.0);
    CHECK(m.rel_bias == 0.0);
    CHECK(m.mse == 0.0);

    const std::vector<double> two{0.9, 1.1};
    const auto t = compute_metrics(two, 1.0);
    CHECK(t.ave == Approx(1.0));
    CHECK(t.bias == Approx(0.0).margin(1e-15));
    CHECK(*t.rel_bias == Approx(0.0).margin(1e-15));
    CHECK(t.mse == Approx(0.01));

    const std::vector<double> table{0.99517};
    CHECK(*compute_metrics(table, 1.0).rel_bias == Approx(0.00483).epsilon(1e-9));

    const std::vector<double> rho{0.1, -0.05};
    const auto r = compute_metrics(rho, 0.0);
    CHECK_FALSE(r.rel_bias.has_value());
    CHECK(r.bias == Approx(0.025));

    CHECK(testing::error_of([] { compute_metrics(std::vector<double>{}, 1.0); }) ==
          ErrorCode::InvalidArgument);
}

TEST_CASE("MSE decomposition identity", "[experiments]") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(1.0, 0.3);
    std::vector<double> v(57);
    for (double& x : v) x = z(rng);
    const auto m = compute_metrics(v, 1.2);
    double direct = 0.0;
    for (double x : v) direct += (x - 1.2) * (x - 1.2);
    direct /= static_cast<double>(v.size());
    CHECK(std::abs(m.mse - (m.variance + m.bias * m.bias)) <= 1e-12);
    CHECK(m.mse == Approx(direct).epsilon(1e-12));
}

TEST_CASE("type 7 quantiles", "[experiments]") {
    CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(quantile({4, 1, 3, 2}, 0.25) == 1.75);
    CHECK(quantile({7}, 0.9) == 7.0);
}

TEST_CASE("single replication", "[experiments]") {
    DgpConfig cfg;
    cfg.n = 200;
    cfg.phi = 1.0;
    cfg.seed = 77;
    const auto a = run_replication(cfg, RadiusSpec::mean(), false);
    REQUIRE(a.pl.has_value());
    CHECK(std::isfinite(a.pl->params.beta));
    CHECK(std::abs(a.pl->params.psi) < 1.0);
    CHECK(a.q >= 90);
    CHECK_FALSE(a.fl.has_value());
    CHECK(a.fl_error.empty());

    const auto b = run_replication(cfg, RadiusSpec::mean(), true);
    CHECK(b.pl->params.beta == a.pl->params.beta);
    CHECK(b.pl->params.psi == a.pl->params.psi);
    REQUIRE(b.fl.has_value());
    CHECK(std::abs(b.fl->rho) < 1.0);

    cfg.n = 4;
    const auto tiny = run_replication(cfg, RadiusSpec::mean(), false);
    CHECK_FALSE(tiny.pl_error.empty());
}

TEST_CASE("Monte Carlo report layout and seeds", "[experiments]") {
    auto mc = small_config();
    mc.radius_specs = {RadiusSpec::mean(), RadiusSpec::max()};
    const auto report = run_montecarlo(mc);
    REQUIRE(report.rows.size() == 2 * 2 * 2);
    CHECK(report.rows[0].phi == 0.8);
    CHECK(report.rows[0].n == 60);
    CHECK(report.rows[1].radius == RadiusSpec::max());
    CHECK(report.rows[2].n == 120);
    for (const auto& row : report.rows) {
        CHECK(row.reps == 4);
        CHECK(row.pl_ok + row.pl_failed == 4);
        CHECK(row.fl_ok + row.fl_failed + row.fl_skipped == 4);
        CHECK_FALSE(row.cell_failed);
        CHECK(row.base_seed == 500);
        for (std::size_t k = 0; k < row.replications.size(); ++k)
            CHECK(row.replications[k].seed == 500 + k);
        CHECK(std::abs(row.beta_pl->mse - (row.beta_pl->variance +
                                           row.beta_pl->bias * row.beta_pl->bias)) <= 1e-12);
        CHECK(row.rho_fl.has_value());
        CHECK_FALSE(row.rho_fl->rel_bias.has_value());
    }
    CHECK(report.failed_cells().empty());
}

TEST_CASE("one replication per cell has zero variance", "[experiments]") {
    auto mc = small_config();
    mc.reps = 1;
    mc.run_fl = false;
    for (const auto& row : run_montecarlo(mc).rows) {
        CHECK(row.beta_pl->variance == 0.0);
        CHECK(row.beta_pl->mse == row.beta_pl->bias * row.beta_pl->bias);
        CHECK(row.sigma_pl->mse == row.sigma_pl->bias * row.sigma_pl->bias);
        CHECK_FALSE(row.beta_fl.has_value());
    }
}

TEST_CASE("reports are reproducible across runs, workers and cell order", "[experiments]") {
    auto mc = small_config();
    const auto a = run_montecarlo(mc);
    mc.workers = 3;
    const auto b = run_montecarlo(mc);
    for (std::size_t i = 0; i < a.rows.size(); ++i) same_estimates(a.rows[i], b.rows[i]);

    testing::TempDir dir("mc");
    write_report_csv(a, dir / "a.csv");
    write_report_csv(b, dir / "b.csv");
    CHECK(testing::slurp(dir / "a.csv") == testing::slurp(dir / "b.csv"));

    // Reversed cell order and a single isolated cell reproduce the same rows.
    auto rev = small_config();
    rev.phis = {1.0, 0.8};
    rev.ns = {120, 60};
    const auto c = run_montecarlo(rev);
    same_estimates(a.rows[0], c.rows[3]);
    same_estimates(a.rows[3], c.rows[0]);
    auto one = small_config();
    one.phis = {1.0};
    one.ns = {60};
    same_estimates(a.rows[2], run_montecarlo(one).rows[0]);
}

TEST_CASE("a cell where every replication fails is flagged", "[experiments]") {
    auto mc = small_config();
    mc.phis = {1.0};
    mc.ns = {4, 60};
    mc.reps = 2;
    const auto report = run_montecarlo(mc);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.rows[0].cell_failed);
    CHECK(report.rows[0].pl_failed == 2);
    CHECK_FALSE(report.rows[0].beta_pl.has_value());
    CHECK_FALSE(report.rows[1].cell_failed);
    REQUIRE(report.failed_cells().size() == 1);
    CHECK(report.failed_cells()[0]->n == 4);

    testing::TempDir dir("failed");
    write_report_csv(report, dir / "r.csv");
    const auto text = testing::slurp(dir / "r.csv");
    CHECK(text.find("CellFailed") != std::string::npos);
}

TEST_CASE("FL is skipped above the size cap", "[experiments]") {
    auto mc = small_config();
    mc.fl_max_n = 100;
    mc.reps = 2;
    const auto report = run_montecarlo(mc);
    for (const auto& row : report.rows) {
        if (row.n > 100) {
            CHECK(row.fl_skipped == 2);
            CHECK_FALSE(row.fl_skip_reason.empty());
            CHECK_FALSE(row.beta_fl.has_value());
        } else {
            CHECK(row.fl_ok == 2);
        }
    }
}

TEST_CASE("buffer sweep rows and pairing counts", "[experiments]") {
    CHECK(buffer_radius_specs().size() == 8);
    auto mc = small_config();
    mc.ns = {150};
    mc.reps = 3;
    mc.run_fl = false;
    const auto report = buffer_sweep(mc);
    REQUIRE(report.rows.size() == 2 * 1 * 8);
    for (std::size_t k = 0; k < 3; ++k) {
        // mean, then mean+50 ... mean+800 in increasing radius.
        std::size_t prev = report.rows[0].replications[k].q;
        for (std::size_t r = 2; r < 8; ++r) {
            const std::size_t q = report.rows[r].replications[k].q;
            CHECK(q >= prev);
            prev = q;
        }
    }
}

TEST_CASE("report writers", "[experiments]") {
    auto mc = small_config();
    mc.reps = 2;
    const auto report = run_montecarlo(mc);
    testing::TempDir dir("writers");
    write_report_csv(report, dir / "r.csv");
    write_report_timing_csv(report, dir / "t.csv");
    write_report_json(report, dir / "r.json");
    const auto csv = testing::slurp(dir / "r.csv");
    std::size_t lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == 1 + report.rows.size());
    CHECK(csv.rfind("phi,n,radius", 0) == 0);
    CHECK(testing::slurp(dir / "r.json").find("\"replications\"") != std::string::npos);
    CHECK(std::filesystem::file_size(dir / "t.csv") > 0);
}

TEST_CASE("timing benchmark", "[experiments]") {
    BenchConfig empty;
    empty.ns = {};
    const auto none = timing_benchmark(empty);
    CHECK(none.rows.empty());
    CHECK(none.pl.points.empty());

    BenchConfig bad;
    bad.ns = {400, 200};
    CHECK(testing::error_of([&] { timing_benchmark(bad); }) == ErrorCode::InvalidArgument);
    bad.ns = {200};
    bad.repeats = 2;
    CHECK(testing::error_of([&] { timing_benchmark(bad); }) == ErrorCode::InvalidArgument);

    BenchConfig cfg;
    cfg.ns = {500, 1000, 2000};
    cfg.repeats = 5;
    cfg.seed = 3;
    const auto t = timing_benchmark(cfg);
    REQUIRE(t.pl.points.size() == 3);
    REQUIRE(t.fl.points.size() == 3);
    for (const auto& p : t.pl.points) {
        CHECK(p.median > 0);
        CHECK(p.samples.size() == 5);
        CHECK(p.q1 <= p.median);
        CHECK(p.median <= p.q3);
    }
    CHECK(t.pl.points[2].median < t.fl.points[2].median);
    CHECK(t.pl.slope < t.fl.slope);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[2].n == 2000);
    CHECK(t.rows[2].pl.has_value());
    CHECK(t.rows[2].fl.has_value());

    testing::TempDir dir("bench");
    write_plot_csv(t.pl, dir / "pl.csv");
    CHECK(testing::slurp(dir / "pl.csv").rfind("n,seconds\n", 0) == 0);

    BenchConfig small;
    small.ns = {100, 200};
    small.repeats = 3;
    write_bench_report_csv(timing_benchmark(small), dir / "a.csv");
    write_bench_report_csv(timing_benchmark(small), dir / "b.csv");
    CHECK(testing::slurp(dir / "a.csv") == testing::slurp(dir / "b.csv"));
}
