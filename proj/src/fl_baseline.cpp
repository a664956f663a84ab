#include "kdtpl/fl_baseline.hpp"

#include "kdtpl/error.hpp"
#include "kdtpl/spatial_index.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace kdtpl {

namespace {
// Filter eigenvalues 1 - rho*lambda at or below this are treated as singular.
constexpr double kSingularFactor = 1e-12;
}

void WeightsMatrix::apply(std::span<const double> v, std::span<double> out) const {
    for (std::size_t r = 0; r < n(); ++r) {
        double acc = 0.0;
        for (std::size_t j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j) acc += vals_[j] * v[cols_[j]];
        out[r] = acc;
    }
}

std::vector<double> WeightsMatrix::to_dense() const {
    std::vector<double> d(n() * n(), 0.0);
    for (std::size_t r = 0; r < n(); ++r)
        for (std::size_t j = row_ptr_[r]; j < row_ptr_[r + 1]; ++j) d[r * n() + cols_[j]] = vals_[j];
    return d;
}

WeightsMatrix build_knn_weights(const PointSet& points, std::size_t k, bool spectrum) {
    const std::size_t n = points.size();
    if (k < 1 || n <= k)
        fail(ErrorCode::InvalidK, "need n > k >= 1 (n=" + std::to_string(n) +
                                      ", k=" + std::to_string(k) + ")");

    const KdTree tree(points);
    std::vector<std::set<Index>> adj(n);
    for (Index i = 0; i < n; ++i) {
        for (const auto& nb : tree.nearest_neighbors(i, k)) {
            adj[i].insert(nb.index);
            adj[nb.index].insert(i);
        }
    }

    WeightsMatrix w;
    w.k_ = k;
    w.row_ptr_.assign(n + 1, 0);
    for (Index i = 0; i < n; ++i) {
        const double deg = static_cast<double>(adj[i].size());
        for (const Index j : adj[i]) {
            w.cols_.push_back(j);
            w.vals_.push_back(1.0 / deg);
        }
        w.row_ptr_[i + 1] = w.cols_.size();
    }

    if (spectrum) {
        // D^{-1/2} A D^{-1/2} is symmetric and similar to D^{-1} A.
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(n));
        for (Index i = 0; i < n; ++i) {
            const double di = static_cast<double>(adj[i].size());
            for (const Index j : adj[i])
                s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    1.0 / std::sqrt(di * static_cast<double>(adj[j].size()));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
        if (eig.info() != Eigen::Success)
            fail(ErrorCode::NoConvergence, "eigenvalue computation failed");
        const auto& ev = eig.eigenvalues();
        w.eigenvalues_.assign(ev.data(), ev.data() + ev.size());
    }
    return w;
}

std::pair<double, double> admissible_rho(const WeightsMatrix& w) {
    if (!w.has_spectrum()) fail(ErrorCode::InvalidArgument, "weights carry no spectrum");
    const double lo = w.lambda_min() < 0.0 ? 1.0 / w.lambda_min() : -1.0;
    const double hi = 1.0 / w.lambda_max();
    return {lo + 1e-6, hi - 1e-6};
}

double log_det_filter(const WeightsMatrix& w, double rho) {
    if (!w.has_spectrum()) fail(ErrorCode::InvalidArgument, "weights carry no spectrum");
    double acc = 0.0;
    for (const double lam : w.eigenvalues()) {
        const double f = 1.0 - rho * lam;
        if (!(f > kSingularFactor)) fail(ErrorCode::InvalidRho, "rho outside the admissible interval");
        acc += std::log(f);
    }
    return acc;
}

namespace {

void check_lengths(std::span<const double> y, std::span<const double> x, const WeightsMatrix& w) {
    if (y.size() != w.n() || x.size() != w.n())
        fail(ErrorCode::InvalidArgument, "data length differs from weights size");
}

// (I - rho W) v
std::vector<double> filter(const WeightsMatrix& w, double rho, std::span<const double> v) {
    std::vector<double> wv(v.size());
    w.apply(v, wv);
    for (std::size_t i = 0; i < v.size(); ++i) wv[i] = v[i] - rho * wv[i];
    return wv;
}

} // namespace

double sem_loglik(std::span<const double> y, std::span<const double> x, const WeightsMatrix& w,
                  double beta, double sigma2, double rho) {
    check_lengths(y, x, w);
    if (!(sigma2 > 0.0)) fail(ErrorCode::InvalidParams, "sigma2 must be positive");
    const double logdet = log_det_filter(w, rho);
    std::vector<double> r(y.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - beta * x[i];
    const auto e = filter(w, rho, r);
    double ss = 0.0;
    for (const double v : e) ss += v * v;
    const double n = static_cast<double>(y.size());
    return -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) + logdet - ss / (2.0 * sigma2);
}

SemScore sem_score(std::span<const double> y, std::span<const double> x, const WeightsMatrix& w,
                   double beta, double sigma2, double rho) {
    check_lengths(y, x, w);
    if (!(sigma2 > 0.0)) fail(ErrorCode::InvalidParams, "sigma2 must be positive");
    const std::size_t n = y.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - beta * x[i];
    std::vector<double> wr(n);
    w.apply(r, wr);
    const auto fx = filter(w, rho, x);
    double ss = 0.0, ex = 0.0, ewr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = r[i] - rho * wr[i];
        ss += e * e;
        ex += e * fx[i];
        ewr += e * wr[i];
    }
    double trace = 0.0;
    for (const double lam : w.eigenvalues()) {
        const double f = 1.0 - rho * lam;
        if (!(f > kSingularFactor)) fail(ErrorCode::InvalidRho, "rho outside the admissible interval");
        trace += lam / f;
    }
    SemScore g;
    g.d_beta = ex / sigma2;
    g.d_sigma2 = -0.5 * static_cast<double>(n) / sigma2 + ss / (2.0 * sigma2 * sigma2);
    g.d_rho = -trace + ewr / sigma2;
    return g;
}

SemProfile profile_rho(std::span<const double> y, std::span<const double> x,
                       const WeightsMatrix& w, double rho) {
    check_lengths(y, x, w);
    const auto fy = filter(w, rho, y);
    const auto fx = filter(w, rho, x);
    double xx = 0.0, xy = 0.0;
    for (std::size_t i = 0; i < fy.size(); ++i) {
        xx += fx[i] * fx[i];
        xy += fx[i] * fy[i];
    }
    if (!(xx > 1e-300)) fail(ErrorCode::SingularDesign, "filtered covariate is zero");
    SemProfile p;
    p.beta = xy / xx;
    double ss = 0.0;
    for (std::size_t i = 0; i < fy.size(); ++i) {
        const double e = fy[i] - p.beta * fx[i];
        ss += e * e;
    }
    const double n = static_cast<double>(y.size());
    p.sigma2 = ss / n;
    if (!(p.sigma2 > 0.0)) fail(ErrorCode::DegenerateVariance, "filtered residuals vanish");
    p.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi * p.sigma2) + 1.0) +
               log_det_filter(w, rho);
    return p;
}

SemFit fit_sem_ml(std::span<const double> y, std::span<const double> x, const WeightsMatrix& w) {
    check_lengths(y, x, w);
    if (y.size() < 10) fail(ErrorCode::InsufficientPoints, "FL fit needs n >= 10");
    const auto [lo, hi] = admissible_rho(w);

    constexpr int kGrid = 41;
    std::vector<double> grid(kGrid);
    int best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (int g = 0; g < kGrid; ++g) {
        grid[g] = lo + (hi - lo) * g / (kGrid - 1);
        const double ll = profile_rho(y, x, w, grid[g]).loglik;
        if (ll > best_ll) {
            best_ll = ll;
            best = g;
        }
    }

    double a = grid[std::max(best - 1, 0)];
    double b = grid[std::min(best + 1, kGrid - 1)];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = profile_rho(y, x, w, c).loglik;
    double fd = profile_rho(y, x, w, d).loglik;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        if (b - a < 1e-8) {
            converged = true;
            break;
        }
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = profile_rho(y, x, w, c).loglik;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = profile_rho(y, x, w, d).loglik;
        }
    }

    // The bracket endpoints are grid points already evaluated; keep whichever
    // of the search result and the best grid point is higher.
    double rho = 0.5 * (a + b);
    SemProfile prof = profile_rho(y, x, w, rho);
    if (prof.loglik < best_ll) {
        rho = grid[best];
        prof = profile_rho(y, x, w, rho);
    }
    return {prof.beta, prof.sigma2, rho, prof.loglik, converged};
}

std::vector<double> spatial_filter_inverse(const WeightsMatrix& w, double rho,
                                           std::span<const double> eps) {
    if (!(std::abs(rho) < 1.0)) fail(ErrorCode::InvalidRho, "|rho| must be < 1");
    if (eps.size() != w.n()) fail(ErrorCode::InvalidArgument, "length differs from weights size");
    std::vector<double> u(eps.begin(), eps.end());
    std::vector<double> wu(u.size());
    // ||rho W||_inf = |rho| < 1, so the iteration contracts.
    for (int it = 0; it < 10'000; ++it) {
        w.apply(u, wu);
        double change = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double next = eps[i] + rho * wu[i];
            change = std::max(change, std::abs(next - u[i]));
            u[i] = next;
        }
        if (change < 1e-14) break;
    }
    return u;
}

} // namespace kdtpl
