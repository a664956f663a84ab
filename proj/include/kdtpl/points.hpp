#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace kdtpl {

using Index = std::size_t;

struct Point {
    Index id = 0;
    double x = 0.0;
    double y = 0.0;
};

// Euclidean metric. Every distance in the library goes through here so that
// tree queries and brute-force scans agree bit for bit.
inline double distance(const Point& a, const Point& b) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

/// Planar locations with ids 0..n-1, optionally carrying a covariate and a
/// response value per location.
class PointSet {
public:
    PointSet() = default;

    /// Coordinates only. Ids are assigned by position.
    PointSet(std::vector<double> xs, std::vector<double> ys);

    /// Coordinates plus covariate/response columns (same length as coordinates).
    PointSet(std::vector<double> xs, std::vector<double> ys,
             std::vector<double> x_cov, std::vector<double> y_resp);

    std::size_t size() const noexcept { return xs_.size(); }
    bool empty() const noexcept { return xs_.empty(); }

    Point operator[](Index i) const noexcept { return {i, xs_[i], ys_[i]}; }
    double x(Index i) const noexcept { return xs_[i]; }
    double y(Index i) const noexcept { return ys_[i]; }

    std::span<const double> xs() const noexcept { return xs_; }
    std::span<const double> ys() const noexcept { return ys_; }

    bool has_data() const noexcept { return !x_cov_.empty(); }
    std::span<const double> covariate() const noexcept { return x_cov_; }
    std::span<const double> response() const noexcept { return y_resp_; }

    void set_data(std::vector<double> x_cov, std::vector<double> y_resp);

private:
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> x_cov_;
    std::vector<double> y_resp_;
};

/// Reads `id,x,y[,x_cov,y_resp]`. Rows may come in any order; ids must form
/// 0..n-1 exactly.
PointSet read_points_csv(const std::filesystem::path& path);

/// Writes `id,x,y` or `id,x,y,x_cov,y_resp` with round-trip precision.
void write_points_csv(const PointSet& points, const std::filesystem::path& path);

} // namespace kdtpl
