#include "catch2/catch_amalgamated.hpp"

#include "kdtpl/error.hpp"
#include "kdtpl/spatial_index.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>
#include <thread>

using namespace kdtpl;
using Catch::Approx;

namespace {

struct Box {
    double lo[2]{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    double hi[2]{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
};

// Walks the tree, checking the split invariant and collecting each leaf's cell.
void walk(const KdTree& tree, const PointSet& pts, std::uint32_t id, Box box,
          std::vector<std::pair<Box, std::vector<Index>>>& cells) {
    const auto& node = tree.nodes()[id];
    if (node.leaf) {
        std::vector<Index> idx(tree.bucket().begin() + node.begin, tree.bucket().begin() + node.end);
        cells.emplace_back(box, idx);
        return;
    }
    Box left = box, right = box;
    left.hi[node.dim] = node.threshold;
    right.lo[node.dim] = node.threshold;
    walk(tree, pts, node.left, left, cells);
    walk(tree, pts, node.right, right, cells);
}

double coord(const PointSet& pts, Index i, int dim) { return dim == 0 ? pts.x(i) : pts.y(i); }

} // namespace

TEST_CASE("empty point set is rejected", "[spatial-index]") {
    CHECK(testing::error_of([] { KdTree tree{PointSet{}}; }) == ErrorCode::EmptyInput);
}

TEST_CASE("single point gives a single leaf", "[spatial-index]") {
    const KdTree tree(PointSet({3.0}, {4.0}));
    REQUIRE(tree.nodes().size() == 1);
    CHECK(tree.nodes()[0].leaf);
    const auto leaves = tree.leaves();
    REQUIRE(leaves.size() == 1);
    CHECK(leaves[0] == std::vector<Index>{0});
}

TEST_CASE("seven points in a 128x128 region get one leaf cell each", "[spatial-index]") {
    const PointSet pts({35, 52, 62, 82, 5, 27, 85}, {42, 10, 77, 65, 45, 35, 15});
    const KdTree tree(pts);
    std::vector<std::pair<Box, std::vector<Index>>> cells;
    walk(tree, pts, 0, Box{{0, 0}, {128, 128}}, cells);
    REQUIRE(cells.size() == 7);

    double area = 0.0;
    for (const auto& [box, idx] : cells) {
        REQUIRE(idx.size() == 1);
        area += (box.hi[0] - box.lo[0]) * (box.hi[1] - box.lo[1]);
        // Exactly one point inside each half-open cell.
        int inside = 0;
        for (Index i = 0; i < pts.size(); ++i) {
            bool in = true;
            for (int d = 0; d < 2; ++d)
                in = in && coord(pts, i, d) >= box.lo[d] && coord(pts, i, d) < box.hi[d];
            inside += in;
        }
        CHECK(inside == 1);
    }
    CHECK(area == Approx(128.0 * 128.0));
}

TEST_CASE("split invariant and leaf enumeration on random points", "[spatial-index]") {
    const auto pts = testing::uniform_points(500, 11);
    const KdTree tree(pts);
    std::vector<std::pair<Box, std::vector<Index>>> cells;
    walk(tree, pts, 0, Box{}, cells);

    std::vector<Index> seen;
    for (const auto& [box, idx] : cells) {
        for (Index i : idx) {
            for (int d = 0; d < 2; ++d) {
                CHECK(coord(pts, i, d) >= box.lo[d]);
                CHECK(coord(pts, i, d) < box.hi[d]);
            }
            seen.push_back(i);
        }
    }
    std::sort(seen.begin(), seen.end());
    std::vector<Index> expect(500);
    for (Index i = 0; i < 500; ++i) expect[i] = i;
    CHECK(seen == expect);
    CHECK(tree.depth() <= static_cast<std::size_t>(std::ceil(std::log2(500.0))) + 1);
}

TEST_CASE("duplicates share a leaf and are counted", "[spatial-index]") {
    const PointSet pts({1, 1, 1, 2}, {1, 1, 1, 3});
    const KdTree tree(pts);
    CHECK(tree.duplicate_count() == 2);
    std::size_t total = 0;
    for (const auto& leaf : tree.leaves()) total += leaf.size();
    CHECK(total == 4);
    const auto nn = tree.nearest_neighbors(0, 3);
    REQUIRE(nn.size() == 3);
    CHECK(nn[0] == Neighbor{1, 0.0});
    CHECK(nn[1] == Neighbor{2, 0.0});
}

TEST_CASE("k nearest neighbors on three collinear points", "[spatial-index]") {
    const auto pts = testing::collinear({0, 1, 5});
    const KdTree tree(pts);
    CHECK(tree.nearest_neighbors(0, 2) == NeighborList{{1, 1.0}, {2, 5.0}});
    CHECK(tree.nearest_neighbors(0, 2, 2.0) == NeighborList{{1, 1.0}});
    CHECK(tree.nearest_neighbors(0, 5) == NeighborList{{1, 1.0}, {2, 5.0}});
}

TEST_CASE("query errors", "[spatial-index]") {
    const auto pts = testing::collinear({0, 1, 5});
    const KdTree tree(pts);
    CHECK(testing::error_of([&] { tree.nearest_neighbors(3, 1); }) == ErrorCode::IndexError);
    CHECK(testing::error_of([&] { tree.nearest_neighbors(0, 0); }) == ErrorCode::InvalidArgument);
    CHECK(testing::error_of([&] { tree.nearest_neighbors(0, 1, -1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("kNN equals a brute-force scan", "[spatial-index]") {
    const auto pts = testing::uniform_points(200, 5);
    const double r_mean = distance_summary(pts).r_mean;
    const KdTree tree(pts);
    for (Index i = 0; i < pts.size(); ++i) {
        for (std::size_t k : {1u, 2u, 7u}) {
            CHECK(tree.nearest_neighbors(i, k, r_mean) == testing::brute_knn(pts, i, k, r_mean));
            CHECK(tree.nearest_neighbors(i, k) ==
                  testing::brute_knn(pts, i, k, std::numeric_limits<double>::infinity()));
        }
        CHECK(tree.within_radius(i, 60.0) == testing::brute_knn(pts, i, pts.size(), 60.0));
    }
}

TEST_CASE("kNN on a lattice with many ties", "[spatial-index]") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) {
            xs.push_back(i);
            ys.push_back(j);
        }
    const PointSet pts(xs, ys);
    const KdTree tree(pts);
    for (Index i = 0; i < pts.size(); ++i)
        for (std::size_t k : {2u, 4u, 9u})
            CHECK(tree.nearest_neighbors(i, k, 1.5) == testing::brute_knn(pts, i, k, 1.5));
}

TEST_CASE("radius queries visit fewer nodes than the tree holds", "[spatial-index]") {
    const auto pts = testing::uniform_points(4000, 8);
    const KdTree tree(pts);
    QueryStats stats;
    tree.nearest_neighbors(17, 2, kUnbounded, &stats);
    CHECK(stats.nodes_visited < tree.nodes().size() / 10);
}

TEST_CASE("concurrent readers get identical answers", "[spatial-index]") {
    const auto pts = testing::uniform_points(1000, 9);
    const KdTree tree(pts);
    std::vector<NeighborList> a(pts.size()), b(pts.size());
    std::thread t1([&] {
        for (Index i = 0; i < pts.size(); ++i) a[i] = tree.nearest_neighbors(i, 3);
    });
    std::thread t2([&] {
        for (Index i = 0; i < pts.size(); ++i) b[i] = tree.nearest_neighbors(i, 3);
    });
    t1.join();
    t2.join();
    CHECK(a == b);
}

TEST_CASE("distance summary", "[spatial-index]") {
    const auto two = testing::collinear({0, 4});
    const auto s2 = distance_summary(two);
    CHECK(s2.r_mean == 4.0);
    CHECK(s2.r_max == 4.0);

    const auto s3 = distance_summary(testing::collinear({0, 1, 3}));
    CHECK(s3.r_mean == Approx(2.0));
    CHECK(s3.r_max == 3.0);
    CHECK(s3.exact);

    const auto pts = testing::uniform_points(2000, 21);
    const auto exact = distance_summary(pts);
    CHECK(exact.r_mean == Approx(testing::brute_mean_distance(pts)).epsilon(1e-12));
    const auto sampled = distance_summary(pts, DistanceMode::sampled(100'000, 3));
    CHECK_FALSE(sampled.exact);
    CHECK(std::abs(sampled.r_mean - exact.r_mean) < 0.02 * exact.r_mean);
    CHECK(sampled.r_max <= exact.r_max);

    CHECK(testing::error_of([] { distance_summary(testing::collinear({1})); }) ==
          ErrorCode::InsufficientPoints);
}

TEST_CASE("automatic mode switches to sampling above the exact limit", "[spatial-index]") {
    CHECK(DistanceMode::automatic(20'000).exact);
    CHECK_FALSE(DistanceMode::automatic(20'001).exact);
}
