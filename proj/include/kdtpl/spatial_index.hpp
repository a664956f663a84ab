#pragma once

#include "kdtpl/points.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace kdtpl {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

struct Neighbor {
    Index index = 0;
    double dist = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Sorted by nondecreasing distance, ties by lower index.
using NeighborList = std::vector<Neighbor>;

struct QueryStats {
    std::size_t nodes_visited = 0;
};

/// Static 2-d tree with median splits on the axis of largest spread.
///
/// Owns a copy of the coordinates, so it outlives the PointSet it was built
/// from and can be moved across threads. All queries are const and exact.
class KdTree {
public:
    struct Node {
        // Leaves reference the half-open range [begin, end) of bucket().
        bool leaf = false;
        std::uint8_t dim = 0;
        double threshold = 0.0;
        std::uint32_t left = 0;
        std::uint32_t right = 0;
        std::uint32_t begin = 0;
        std::uint32_t end = 0;
    };

    explicit KdTree(const PointSet& points);

    std::size_t size() const noexcept { return xs_.size(); }

    /// Up to k nearest points to `query` within `radius`, excluding the query
    /// itself. Throws IndexError when `query` is out of range.
    NeighborList nearest_neighbors(Index query, std::size_t k, double radius = kUnbounded,
                                   QueryStats* stats = nullptr) const;

    /// Same search around an arbitrary location; nothing is excluded.
    NeighborList nearest_to(double x, double y, std::size_t k, double radius = kUnbounded,
                            QueryStats* stats = nullptr) const;

    /// Every index within `radius` of `query` (query excluded), sorted.
    NeighborList within_radius(Index query, double radius) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const std::vector<Index>& bucket() const noexcept { return order_; }

    /// Point indices of each leaf, in tree order.
    std::vector<std::vector<Index>> leaves() const;

    std::size_t depth() const;

    /// Points whose coordinates repeat an earlier point exactly.
    std::size_t duplicate_count() const noexcept { return duplicates_; }

private:
    std::uint32_t build(std::uint32_t begin, std::uint32_t end, std::size_t level);
    NeighborList search(double qx, double qy, std::size_t k, double radius, Index exclude,
                        QueryStats* stats) const;

    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<Node> nodes_;
    std::vector<Index> order_;
    std::size_t duplicates_ = 0;
};

struct DistanceSummary {
    double r_mean = 0.0;
    double r_max = 0.0;
    bool exact = true;
};

struct DistanceMode {
    bool exact = true;
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    static DistanceMode all_pairs() { return {}; }
    static DistanceMode sampled(std::size_t m, std::uint64_t seed) { return {false, m, seed}; }

    /// All pairs up to `kExactLimit` points, a fixed-seed sample above.
    static DistanceMode automatic(std::size_t n);

    static constexpr std::size_t kExactLimit = 20'000;
};

/// Mean and maximum pairwise distance. Throws InsufficientPoints for n < 2.
DistanceSummary distance_summary(const PointSet& points,
                                 DistanceMode mode = DistanceMode::all_pairs());

/// Mean distance from each point to its nearest other point.
double mean_nearest_neighbor_distance(const PointSet& points);

} // namespace kdtpl
