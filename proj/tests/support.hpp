#pragma once

// Reference implementations and helpers shared by the test binaries.

#include "kdtpl/coupling.hpp"
#include "kdtpl/error.hpp"
#include "kdtpl/points.hpp"
#include "kdtpl/spatial_index.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

// Code of the kdtpl::Error thrown by fn, or nullopt if it returned normally.
template <class F>
std::optional<kdtpl::ErrorCode> error_of(F&& fn) {
    try {
        fn();
    } catch (const kdtpl::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

inline kdtpl::PointSet uniform_points(std::size_t n, std::uint64_t seed, double side = 1000.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, side);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = u(rng);
        ys[i] = u(rng);
    }
    return kdtpl::PointSet(std::move(xs), std::move(ys));
}

inline kdtpl::PointSet collinear(std::vector<double> xs) {
    std::vector<double> ys(xs.size(), 0.0);
    return kdtpl::PointSet(std::move(xs), std::move(ys));
}

// Full scan, sorted by (distance, index), query point excluded.
inline kdtpl::NeighborList brute_knn(const kdtpl::PointSet& pts, kdtpl::Index query, std::size_t k,
                                     double radius) {
    kdtpl::NeighborList all;
    for (kdtpl::Index j = 0; j < pts.size(); ++j) {
        if (j == query) continue;
        const double d = kdtpl::distance(pts[query], pts[j]);
        if (d <= radius) all.push_back({j, d});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.index < b.index;
    });
    if (all.size() > k) all.resize(k);
    return all;
}

// Greedy scan over a full distance matrix.
inline std::vector<kdtpl::Couplet> brute_pairing(const kdtpl::PointSet& pts, double radius) {
    const std::size_t n = pts.size();
    std::vector<double> d(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d[i * n + j] = kdtpl::distance(pts[i], pts[j]);
    std::vector<bool> paired(n, false);
    std::vector<kdtpl::Couplet> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (paired[i]) continue;
        std::size_t best = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || paired[j] || d[i * n + j] > radius) continue;
            if (best == n || d[i * n + j] < d[i * n + best]) best = j;
        }
        if (best == n) continue;
        paired[i] = paired[best] = true;
        out.push_back({i, best, d[i * n + best]});
    }
    return out;
}

inline double brute_mean_distance(const kdtpl::PointSet& pts) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j, ++count)
            sum += kdtpl::distance(pts[i], pts[j]);
    return sum / static_cast<double>(count);
}

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("kdtpl-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

} // namespace testing
