#include "kdtpl/spatial_index.hpp"

#include "kdtpl/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace kdtpl {

namespace {

// Candidate ordering used everywhere: distance first, then index.
bool closer(const Neighbor& a, const Neighbor& b) noexcept {
    return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
}

// Subtree lower bounds are compared with a hair of slack so rounding in the
// distance formula can never prune a point that the brute-force scan keeps.
bool may_contain(double lower_bound, double bound) noexcept {
    return lower_bound <= bound + 1e-12 * std::max(1.0, bound);
}

constexpr Index kNoExclude = static_cast<Index>(-1);

} // namespace

KdTree::KdTree(const PointSet& points)
    : xs_(points.xs().begin(), points.xs().end()), ys_(points.ys().begin(), points.ys().end()) {
    if (points.empty()) fail(ErrorCode::EmptyInput, "cannot build a tree over zero points");
    if (points.size() > std::numeric_limits<std::uint32_t>::max())
        fail(ErrorCode::InvalidArgument, "too many points");

    order_.resize(size());
    for (Index i = 0; i < size(); ++i) order_[i] = i;
    nodes_.reserve(2 * size());
    build(0, static_cast<std::uint32_t>(size()), 0);

    std::vector<Index> sorted(order_);
    std::sort(sorted.begin(), sorted.end(), [&](Index a, Index b) {
        return std::tie(xs_[a], ys_[a], a) < std::tie(xs_[b], ys_[b], b);
    });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (xs_[sorted[i]] == xs_[sorted[i - 1]] && ys_[sorted[i]] == ys_[sorted[i - 1]])
            ++duplicates_;
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end, std::size_t level) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({});
    Node node;

    if (end - begin == 1) {
        node.leaf = true;
        node.begin = begin;
        node.end = end;
        nodes_[id] = node;
        return id;
    }

    auto spread = [&](const std::vector<double>& c) {
        auto [lo, hi] = std::minmax_element(order_.begin() + begin, order_.begin() + end,
                                            [&](Index a, Index b) { return c[a] < c[b]; });
        return c[*hi] - c[*lo];
    };
    const double sx = spread(xs_);
    const double sy = spread(ys_);
    std::uint8_t dim = sx > sy ? 0 : (sy > sx ? 1 : static_cast<std::uint8_t>(level % 2));

    // Split at position count/2; move the cut so that every coordinate equal
    // to the threshold lands on the right. If one axis is constant over the
    // range, fall back to the other; identical points end up sharing a leaf.
    std::uint32_t cut = end;
    for (int attempt = 0; attempt < 2 && cut == end; ++attempt) {
        const auto& c = dim == 0 ? xs_ : ys_;
        std::sort(order_.begin() + begin, order_.begin() + end,
                  [&](Index a, Index b) { return c[a] < c[b] || (c[a] == c[b] && a < b); });
        cut = begin + (end - begin) / 2;
        const double thr = c[order_[cut]];
        while (cut > begin && c[order_[cut - 1]] == thr) --cut;
        if (cut == begin) {
            while (cut < end && c[order_[cut]] == thr) ++cut;
        }
        if (cut == end) dim = static_cast<std::uint8_t>(1 - dim);
    }

    if (cut == end) {
        node.leaf = true;
        node.begin = begin;
        node.end = end;
        nodes_[id] = node;
        return id;
    }

    node.dim = dim;
    node.threshold = (dim == 0 ? xs_ : ys_)[order_[cut]];
    node.left = build(begin, cut, level + 1);
    node.right = build(cut, end, level + 1);
    nodes_[id] = node;
    return id;
}

NeighborList KdTree::search(double qx, double qy, std::size_t k, double radius, Index exclude,
                            QueryStats* stats) const {
    if (k == 0) fail(ErrorCode::InvalidArgument, "k must be positive");
    if (!(radius >= 0.0)) fail(ErrorCode::InvalidArgument, "radius must be nonnegative");

    // Max-heap on (dist, index): front is the current worst of the best k.
    NeighborList heap;
    heap.reserve(std::min(k, size()));
    std::size_t visited = 0;
    const Point q{0, qx, qy};

    auto bound = [&] { return heap.size() < k ? radius : std::min(radius, heap.front().dist); };

    auto visit = [&](auto&& self, std::uint32_t id) -> void {
        ++visited;
        const Node& node = nodes_[id];
        if (node.leaf) {
            for (std::uint32_t i = node.begin; i < node.end; ++i) {
                const Index idx = order_[i];
                if (idx == exclude) continue;
                const double d = distance(q, Point{idx, xs_[idx], ys_[idx]});
                if (!(d <= radius)) continue;
                const Neighbor cand{idx, d};
                if (heap.size() < k) {
                    heap.push_back(cand);
                    std::push_heap(heap.begin(), heap.end(), closer);
                } else if (closer(cand, heap.front())) {
                    std::pop_heap(heap.begin(), heap.end(), closer);
                    heap.back() = cand;
                    std::push_heap(heap.begin(), heap.end(), closer);
                }
            }
            return;
        }
        const double diff = (node.dim == 0 ? qx : qy) - node.threshold;
        const std::uint32_t near = diff < 0 ? node.left : node.right;
        const std::uint32_t far = diff < 0 ? node.right : node.left;
        self(self, near);
        if (may_contain(std::abs(diff), bound())) self(self, far);
    };
    visit(visit, 0);

    std::sort_heap(heap.begin(), heap.end(), closer);
    if (stats) stats->nodes_visited += visited;
    return heap;
}

NeighborList KdTree::nearest_neighbors(Index query, std::size_t k, double radius,
                                       QueryStats* stats) const {
    if (query >= size())
        fail(ErrorCode::IndexError, "query index " + std::to_string(query) + " out of range");
    return search(xs_[query], ys_[query], k, radius, query, stats);
}

NeighborList KdTree::nearest_to(double x, double y, std::size_t k, double radius,
                                QueryStats* stats) const {
    return search(x, y, k, radius, kNoExclude, stats);
}

NeighborList KdTree::within_radius(Index query, double radius) const {
    return nearest_neighbors(query, size(), radius);
}

std::vector<std::vector<Index>> KdTree::leaves() const {
    std::vector<std::vector<Index>> out;
    for (const auto& node : nodes_)
        if (node.leaf) out.emplace_back(order_.begin() + node.begin, order_.begin() + node.end);
    return out;
}

std::size_t KdTree::depth() const {
    auto walk = [&](auto&& self, std::uint32_t id) -> std::size_t {
        const Node& n = nodes_[id];
        if (n.leaf) return 0;
        return 1 + std::max(self(self, n.left), self(self, n.right));
    };
    return walk(walk, 0);
}

DistanceMode DistanceMode::automatic(std::size_t n) {
    if (n <= kExactLimit) return all_pairs();
    return sampled(1'000'000, 0x5eed'd157ULL);
}

DistanceSummary distance_summary(const PointSet& points, DistanceMode mode) {
    const std::size_t n = points.size();
    if (n < 2) fail(ErrorCode::InsufficientPoints, "distance summary needs at least two points");

    DistanceSummary out;
    long double sum = 0.0L;
    double max = 0.0;
    std::size_t count = 0;

    if (mode.exact) {
        for (Index i = 0; i < n; ++i) {
            const Point p = points[i];
            for (Index j = i + 1; j < n; ++j) {
                const double d = distance(p, points[j]);
                sum += d;
                max = std::max(max, d);
            }
        }
        count = n * (n - 1) / 2;
    } else {
        if (mode.samples == 0) fail(ErrorCode::InvalidArgument, "sampled mode needs m >= 1");
        std::mt19937_64 rng(mode.seed);
        std::uniform_int_distribution<Index> first(0, n - 1);
        std::uniform_int_distribution<Index> second(0, n - 2);
        for (std::size_t s = 0; s < mode.samples; ++s) {
            const Index i = first(rng);
            Index j = second(rng);
            if (j >= i) ++j;
            const double d = distance(points[i], points[j]);
            sum += d;
            max = std::max(max, d);
        }
        count = mode.samples;
        out.exact = false;
    }
    out.r_mean = static_cast<double>(sum / static_cast<long double>(count));
    out.r_max = max;
    return out;
}

double mean_nearest_neighbor_distance(const PointSet& points) {
    if (points.size() < 2)
        fail(ErrorCode::InsufficientPoints, "nearest-neighbor distance needs two points");
    const KdTree tree(points);
    long double sum = 0.0L;
    for (Index i = 0; i < points.size(); ++i) sum += tree.nearest_neighbors(i, 1).front().dist;
    return static_cast<double>(sum / points.size());
}

} // namespace kdtpl
