#include "kdtpl/points.hpp"

#include "csv.hpp"
#include "kdtpl/error.hpp"

#include <cmath>

namespace kdtpl {

namespace {

void check_finite(std::span<const double> v, const char* what) {
    for (double d : v)
        if (!std::isfinite(d)) fail(ErrorCode::InvalidArgument, std::string("non-finite ") + what);
}

} // namespace

PointSet::PointSet(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size())
        fail(ErrorCode::InvalidArgument, "coordinate arrays differ in length");
    check_finite(xs_, "coordinate");
    check_finite(ys_, "coordinate");
}

PointSet::PointSet(std::vector<double> xs, std::vector<double> ys,
                   std::vector<double> x_cov, std::vector<double> y_resp)
    : PointSet(std::move(xs), std::move(ys)) {
    set_data(std::move(x_cov), std::move(y_resp));
}

void PointSet::set_data(std::vector<double> x_cov, std::vector<double> y_resp) {
    if (x_cov.size() != xs_.size() || y_resp.size() != xs_.size())
        fail(ErrorCode::InvalidArgument, "covariate/response length differs from point count");
    x_cov_ = std::move(x_cov);
    y_resp_ = std::move(y_resp);
}

PointSet read_points_csv(const std::filesystem::path& path) {
    const auto t = csv::read(path);
    const bool with_data = t.header.size() == 5;
    const bool ok = (t.header.size() == 3 || with_data) && t.header[0] == "id" &&
                    t.header[1] == "x" && t.header[2] == "y" &&
                    (!with_data || (t.header[3] == "x_cov" && t.header[4] == "y_resp"));
    if (!ok)
        fail(ErrorCode::ParseError, path.string() + ": header must be id,x,y[,x_cov,y_resp]");

    const std::size_t n = t.rows.size();
    std::vector<double> xs(n), ys(n), xc, yr;
    if (with_data) {
        xc.resize(n);
        yr.resize(n);
    }
    std::vector<bool> seen(n, false);
    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = t.rows[r];
        const std::size_t line = r + 2;
        const auto id = csv::to_index(row[0], path, line);
        if (id >= n || seen[id])
            fail(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) +
                                            ": ids must be a permutation of 0..n-1");
        seen[id] = true;
        xs[id] = csv::to_double(row[1], path, line);
        ys[id] = csv::to_double(row[2], path, line);
        if (with_data) {
            xc[id] = csv::to_double(row[3], path, line);
            yr[id] = csv::to_double(row[4], path, line);
        }
    }
    if (with_data) return PointSet(std::move(xs), std::move(ys), std::move(xc), std::move(yr));
    return PointSet(std::move(xs), std::move(ys));
}

void write_points_csv(const PointSet& points, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << (points.has_data() ? "id,x,y,x_cov,y_resp\n" : "id,x,y\n");
    for (Index i = 0; i < points.size(); ++i) {
        out << i << ',' << csv::fmt(points.x(i)) << ',' << csv::fmt(points.y(i));
        if (points.has_data())
            out << ',' << csv::fmt(points.covariate()[i]) << ',' << csv::fmt(points.response()[i]);
        out << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

} // namespace kdtpl
