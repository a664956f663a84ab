#include "kdtpl/datagen.hpp"

#include "kdtpl/error.hpp"
#include "kdtpl/spatial_index.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace kdtpl {

std::string_view scaling_name(DistanceScaling s) noexcept {
    switch (s) {
    case DistanceScaling::MeanNearestNeighbor: return "nn-mean";
    case DistanceScaling::MeanDistance: return "mean";
    case DistanceScaling::MaxDistance: return "max";
    case DistanceScaling::None: return "none";
    }
    return "nn-mean";
}

DistanceScaling parse_scaling(std::string_view name) {
    for (auto s : {DistanceScaling::MeanNearestNeighbor, DistanceScaling::MeanDistance,
                   DistanceScaling::MaxDistance, DistanceScaling::None})
        if (scaling_name(s) == name) return s;
    fail(ErrorCode::ParseError, "unknown distance scaling '" + std::string(name) + "'");
}

PointSet gen_locations(std::size_t n, double domain, Rng& rng) {
    if (n < 2) fail(ErrorCode::InsufficientPoints, "need n >= 2 locations");
    if (!(domain > 0.0)) fail(ErrorCode::InvalidArgument, "domain must be positive");
    std::uniform_real_distribution<double> u(0.0, domain);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = u(rng);
        ys[i] = u(rng);
    }
    return PointSet(std::move(xs), std::move(ys));
}

double distance_scale(const PointSet& points, DistanceScaling scaling) {
    switch (scaling) {
    case DistanceScaling::MeanNearestNeighbor: return mean_nearest_neighbor_distance(points);
    case DistanceScaling::MeanDistance: return distance_summary(points).r_mean;
    case DistanceScaling::MaxDistance: return distance_summary(points).r_max;
    case DistanceScaling::None: return 1.0;
    }
    return 1.0;
}

Eigen::MatrixXd correlation_matrix(const PointSet& points, double phi, double scale) {
    const auto n = static_cast<Eigen::Index>(points.size());
    if (n < 2) fail(ErrorCode::InsufficientPoints, "need n >= 2 locations");
    if (!(phi > 0.0) || !(scale > 0.0))
        fail(ErrorCode::InvalidArgument, "phi and distance scale must be positive");
    Eigen::MatrixXd m(n, n);
    const double rate = phi / scale;
    for (Eigen::Index j = 0; j < n; ++j) {
        m(j, j) = 1.0;
        const Point pj = points[static_cast<Index>(j)];
        for (Eigen::Index i = j + 1; i < n; ++i) {
            const double v = std::exp(-rate * distance(points[static_cast<Index>(i)], pj));
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) fail(ErrorCode::InvalidArgument, "matrix must be square");
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        fail(ErrorCode::NotPositiveDefinite, "matrix is not positive definite");
    return llt.matrixL();
}

Dataset simulate_dataset(const DgpConfig& cfg) {
    if (cfg.n < 2) fail(ErrorCode::InsufficientPoints, "need n >= 2");
    if (cfg.n > DgpConfig::kMaxN)
        fail(ErrorCode::InvalidArgument, "dense generator is capped at n = 20000");
    if (!(cfg.phi > 0.0)) fail(ErrorCode::InvalidArgument, "phi must be positive");
    if (!(cfg.sigma > 0.0)) fail(ErrorCode::InvalidArgument, "sigma must be positive");

    Rng rng(cfg.seed);
    Dataset ds;
    PointSet locations = gen_locations(cfg.n, cfg.domain, rng);
    ds.distance_scale = distance_scale(locations, cfg.scaling);

    const auto n = static_cast<Eigen::Index>(cfg.n);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(rng);
    ds.x.resize(cfg.n);
    for (auto& v : ds.x) v = normal(rng);

    // Factor in place: the correlation matrix is the largest allocation here.
    Eigen::MatrixXd phi_m = correlation_matrix(locations, cfg.phi, ds.distance_scale);
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(phi_m);
    if (llt.info() != Eigen::Success)
        fail(ErrorCode::NotPositiveDefinite, "correlation matrix is not positive definite");
    Eigen::VectorXd e = phi_m.triangularView<Eigen::Lower>() * z;
    e *= cfg.sigma;

    ds.eps.assign(e.data(), e.data() + e.size());
    ds.y.resize(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) ds.y[i] = cfg.beta * ds.x[i] + ds.eps[i];
    locations.set_data(ds.x, ds.y);
    ds.points = std::move(locations);
    return ds;
}

} // namespace kdtpl
