#include "catch2/catch_amalgamated.hpp"

#include "kdtpl/fl_baseline.hpp"
#include "support.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

using namespace kdtpl;
using Catch::Approx;

namespace {

Eigen::MatrixXd dense(const WeightsMatrix& w) {
    const auto n = static_cast<Eigen::Index>(w.n());
    const auto v = w.to_dense();
    return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        v.data(), n, n);
}

struct SemData {
    std::vector<double> x, y;
};

// y = beta x + u with (I - rho W) u = eps, solved densely.
SemData sem_data(const WeightsMatrix& w, double beta, double rho, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(w.n());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::VectorXd eps(n), x(n);
    for (Eigen::Index i = 0; i < n; ++i) eps[i] = z(rng);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = z(rng);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - rho * dense(w);
    const Eigen::VectorXd u = a.partialPivLu().solve(eps);
    SemData d;
    d.x.assign(x.data(), x.data() + n);
    d.y.resize(w.n());
    for (Eigen::Index i = 0; i < n; ++i) d.y[i] = beta * x[i] + u[i];
    return d;
}

} // namespace

TEST_CASE("weights for three collinear points", "[fl-baseline]") {
    const auto w = build_knn_weights(testing::collinear({0, 1, 3}), 1);
    const auto d = w.to_dense();
    const std::vector<double> expect{0, 1, 0, 0.5, 0, 0.5, 0, 1, 0};
    CHECK(d == expect);
    CHECK(w.lambda_max() == Approx(1.0));
}

TEST_CASE("weights are row stochastic with a zero diagonal", "[fl-baseline]") {
    const auto pts = testing::uniform_points(300, 2);
    const auto w = build_knn_weights(pts, 5);
    const auto rp = w.row_ptr();
    const auto cols = w.cols();
    const auto vals = w.values();
    for (std::size_t i = 0; i < w.n(); ++i) {
        double sum = 0.0;
        for (std::size_t p = rp[i]; p < rp[i + 1]; ++p) {
            CHECK(cols[p] != i);
            sum += vals[p];
        }
        CHECK(sum == Approx(1.0).epsilon(1e-14));
        CHECK(rp[i + 1] - rp[i] >= 5);
    }
    CHECK(std::abs(w.lambda_max() - 1.0) < 1e-10);
    CHECK(w.lambda_min() >= -1.0 - 1e-10);

    // The spectrum matches a general eigen-solve of the dense matrix.
    Eigen::EigenSolver<Eigen::MatrixXd> es(dense(w), false);
    std::vector<double> re;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        CHECK(std::abs(es.eigenvalues()[i].imag()) < 1e-8);
        re.push_back(es.eigenvalues()[i].real());
    }
    std::sort(re.begin(), re.end());
    for (std::size_t i = 0; i < re.size(); ++i) CHECK(w.eigenvalues()[i] == Approx(re[i]).margin(1e-9));
}

TEST_CASE("weights argument checks", "[fl-baseline]") {
    const auto pts = testing::uniform_points(5, 1);
    CHECK(testing::error_of([&] { build_knn_weights(pts, 0); }) == ErrorCode::InvalidK);
    CHECK(testing::error_of([&] { build_knn_weights(pts, 5); }) == ErrorCode::InvalidK);
    CHECK_NOTHROW(build_knn_weights(pts, 4));
}

TEST_CASE("sparse product matches the dense matrix", "[fl-baseline]") {
    const auto pts = testing::uniform_points(80, 3);
    const auto w = build_knn_weights(pts, 4, false);
    CHECK_FALSE(w.has_spectrum());
    std::vector<double> v(80), out(80);
    for (std::size_t i = 0; i < 80; ++i) v[i] = std::sin(static_cast<double>(i));
    w.apply(v, out);
    const Eigen::VectorXd ref = dense(w) * Eigen::Map<const Eigen::VectorXd>(v.data(), 80);
    for (std::size_t i = 0; i < 80; ++i) CHECK(out[i] == Approx(ref[static_cast<Eigen::Index>(i)]));
}

TEST_CASE("log determinant agrees with a dense LU", "[fl-baseline]") {
    const auto pts = testing::uniform_points(150, 4);
    const auto w = build_knn_weights(pts, 5);
    const auto [lo, hi] = admissible_rho(w);
    CHECK(lo < -1.0);
    CHECK(hi == Approx(1.0).margin(1e-5));
    const Eigen::MatrixXd wd = dense(w);
    for (double rho : {-0.8, -0.3, 0.0, 0.4, 0.9, 0.99}) {
        const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(150, 150) - rho * wd;
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
        const double ref = lu.matrixLU().diagonal().array().abs().log().sum();
        CHECK(log_det_filter(w, rho) == Approx(ref).margin(1e-9));
    }
    CHECK(testing::error_of([&] { log_det_filter(w, 1.0); }) == ErrorCode::InvalidRho);
    CHECK(testing::error_of([&] { log_det_filter(w, lo - 0.1); }) == ErrorCode::InvalidRho);
}

TEST_CASE("SEM likelihood reductions at rho = 0", "[fl-baseline]") {
    const auto pts = testing::uniform_points(60, 5);
    const auto w = build_knn_weights(pts, 5);
    std::vector<double> x(60), y(60);
    for (std::size_t i = 0; i < 60; ++i) {
        x[i] = std::cos(0.3 * static_cast<double>(i));
        y[i] = 2.0 * x[i];
    }
    CHECK(sem_loglik(y, x, w, 2.0, 1.0, 0.0) == Approx(-30.0 * std::log(2 * std::numbers::pi)));

    for (std::size_t i = 0; i < 60; ++i) y[i] += 0.1 * std::sin(static_cast<double>(i));
    double ref = 0.0;
    const double s2 = 1.7;
    for (std::size_t i = 0; i < 60; ++i) {
        const double r = y[i] - 2.0 * x[i];
        ref += -0.5 * std::log(2 * std::numbers::pi * s2) - r * r / (2 * s2);
    }
    CHECK(sem_loglik(y, x, w, 2.0, s2, 0.0) == Approx(ref).epsilon(1e-12));
}

TEST_CASE("SEM score matches finite differences", "[fl-baseline]") {
    const auto pts = testing::uniform_points(120, 6);
    const auto w = build_knn_weights(pts, 5);
    const auto d = sem_data(w, 1.0, 0.4, 6);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ub(0.5, 1.5), us(0.5, 2.0), ur(-0.5, 0.8);
    for (int trial = 0; trial < 10; ++trial) {
        const double b = ub(rng), s2 = us(rng), rho = ur(rng);
        const auto g = sem_score(d.y, d.x, w, b, s2, rho);
        const double h = 1e-6;
        const double fb = (sem_loglik(d.y, d.x, w, b + h, s2, rho) -
                           sem_loglik(d.y, d.x, w, b - h, s2, rho)) / (2 * h);
        const double fs = (sem_loglik(d.y, d.x, w, b, s2 + h, rho) -
                           sem_loglik(d.y, d.x, w, b, s2 - h, rho)) / (2 * h);
        const double fr = (sem_loglik(d.y, d.x, w, b, s2, rho + h) -
                           sem_loglik(d.y, d.x, w, b, s2, rho - h)) / (2 * h);
        CHECK(g.d_beta == Approx(fb).margin(1e-4));
        CHECK(g.d_sigma2 == Approx(fs).margin(1e-4));
        CHECK(g.d_rho == Approx(fr).margin(1e-4));
    }
}

TEST_CASE("concentrated fit recovers a known rho", "[fl-baseline]") {
    const auto pts = testing::uniform_points(400, 7);
    const auto w = build_knn_weights(pts, 5);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto d = sem_data(w, 1.0, 0.5, seed);
        const auto fit = fit_sem_ml(d.y, d.x, w);
        CHECK(fit.converged);
        CHECK(fit.rho > 0.3);
        CHECK(fit.rho < 0.7);
        // Profile maximum: the score in rho vanishes at the reported optimum.
        CHECK(std::abs(sem_score(d.y, d.x, w, fit.beta, fit.sigma2, fit.rho).d_rho) < 1e-3);
        const auto prof = profile_rho(d.y, d.x, w, fit.rho);
        CHECK(prof.beta == Approx(fit.beta));
        CHECK(prof.loglik == Approx(fit.loglik));
        for (double r : {fit.rho - 0.05, fit.rho + 0.05})
            CHECK(profile_rho(d.y, d.x, w, r).loglik < fit.loglik);
    }
}

TEST_CASE("independent errors give rho near zero", "[fl-baseline]") {
    const auto pts = testing::uniform_points(400, 8);
    const auto w = build_knn_weights(pts, 5);
    const auto d = sem_data(w, 1.0, 0.0, 4);
    const auto fit = fit_sem_ml(d.y, d.x, w);
    CHECK(std::abs(fit.rho) < 0.1);
    CHECK(std::abs(fit.beta - 1.0) < 3.0 / std::sqrt(400.0));
}

TEST_CASE("fit preconditions", "[fl-baseline]") {
    const auto small = testing::uniform_points(8, 1);
    const auto w = build_knn_weights(small, 3);
    std::vector<double> x(8, 1.0), y(8, 1.0);
    CHECK(testing::error_of([&] { fit_sem_ml(y, x, w); }) == ErrorCode::InsufficientPoints);

    const auto pts = testing::uniform_points(30, 2);
    const auto w30 = build_knn_weights(pts, 4);
    std::vector<double> zx(30, 0.0), zy(30, 1.0);
    CHECK(testing::error_of([&] { profile_rho(zy, zx, w30, 0.1); }) == ErrorCode::SingularDesign);
}

TEST_CASE("spatial filter inverse solves the SEM forward model", "[fl-baseline]") {
    const auto pts = testing::uniform_points(100, 9);
    const auto w = build_knn_weights(pts, 5, false);
    std::vector<double> eps(100);
    for (std::size_t i = 0; i < 100; ++i) eps[i] = std::sin(1.3 * static_cast<double>(i));
    const auto u = spatial_filter_inverse(w, 0.6, eps);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(100, 100) - 0.6 * dense(w);
    const Eigen::VectorXd ref = a.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(eps.data(), 100));
    for (std::size_t i = 0; i < 100; ++i) CHECK(u[i] == Approx(ref[static_cast<Eigen::Index>(i)]).margin(1e-9));
}
