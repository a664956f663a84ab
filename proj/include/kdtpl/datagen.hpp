#pragma once

#include "kdtpl/points.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace kdtpl {

/// Divisor applied to raw distances before the exponential kernel.
enum class DistanceScaling {
    MeanNearestNeighbor, // mean nearest-neighbor distance of the point set
    MeanDistance,        // mean pairwise distance
    MaxDistance,         // maximum pairwise distance
    None,                // raw distances
};

std::string_view scaling_name(DistanceScaling s) noexcept;
DistanceScaling parse_scaling(std::string_view name);

struct DgpConfig {
    std::size_t n = 200;
    double phi = 1.0;
    double beta = 1.0;
    double sigma = 1.0;
    double domain = 1000.0;
    DistanceScaling scaling = DistanceScaling::MeanNearestNeighbor;
    std::uint64_t seed = 0;

    static constexpr std::size_t kMaxN = 20'000;
};

struct Dataset {
    PointSet points; // carries x as covariate and y as response
    std::vector<double> x;
    std::vector<double> eps;
    std::vector<double> y;
    double distance_scale = 1.0;
};

using Rng = std::mt19937_64;

/// n locations uniform on [0, domain]^2.
PointSet gen_locations(std::size_t n, double domain, Rng& rng);

double distance_scale(const PointSet& points, DistanceScaling scaling);

/// exp(-phi * d / scale) with an exact unit diagonal.
Eigen::MatrixXd correlation_matrix(const PointSet& points, double phi, double scale);

/// Lower Cholesky factor. Throws NotPositiveDefinite.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& m);

/// Locations, exponential-correlation Gaussian errors, standard normal
/// covariate and y = beta x + sigma L z. Bit-identical for a given config.
Dataset simulate_dataset(const DgpConfig& cfg);

} // namespace kdtpl
