#include "kdtpl/coupling.hpp"

#include "csv.hpp"
#include "kdtpl/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

namespace kdtpl {

RadiusSpec RadiusSpec::mean_plus(double h) {
    if (!(h >= 0.0) || !std::isfinite(h)) fail(ErrorCode::InvalidRadius, "buffer must be >= 0");
    return {Kind::MeanPlusBuffer, h};
}

RadiusSpec RadiusSpec::fixed(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::InvalidRadius, "fixed radius must be > 0");
    return {Kind::Fixed, r};
}

RadiusSpec RadiusSpec::parse(std::string_view text) {
    auto number = [&](std::string_view s) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
            fail(ErrorCode::ParseError, "bad radius '" + std::string(text) + "'");
        return v;
    };
    if (text == "mean") return mean();
    if (text == "max") return max();
    if (text.starts_with("mean+")) return mean_plus(number(text.substr(5)));
    return fixed(number(text));
}

std::string RadiusSpec::label() const {
    switch (kind) {
    case Kind::Mean: return "mean";
    case Kind::Max: return "max";
    case Kind::MeanPlusBuffer: return "mean+" + csv::fmt(value);
    case Kind::Fixed: return csv::fmt(value);
    }
    return {};
}

double resolve_radius(const DistanceSummary& s, const RadiusSpec& spec) {
    double r = 0.0;
    switch (spec.kind) {
    case RadiusSpec::Kind::Mean: r = s.r_mean; break;
    case RadiusSpec::Kind::Max: r = s.r_max; break;
    case RadiusSpec::Kind::MeanPlusBuffer: r = s.r_mean + spec.value; break;
    case RadiusSpec::Kind::Fixed: r = spec.value; break;
    }
    if (!(r > 0.0)) fail(ErrorCode::InvalidRadius, "resolved radius is not positive");
    return r;
}

double resolve_radius(const PointSet& points, const RadiusSpec& spec,
                      std::optional<DistanceMode> mode) {
    if (points.size() < 2) fail(ErrorCode::InsufficientPoints, "radius needs at least two points");
    if (spec.kind == RadiusSpec::Kind::Fixed) return resolve_radius(DistanceSummary{}, spec);
    return resolve_radius(
        distance_summary(points, mode.value_or(DistanceMode::automatic(points.size()))), spec);
}

CoupletSet::CoupletSet(std::size_t n, std::vector<Couplet> couplets)
    : couplets_(std::move(couplets)), partner_(n, kNone), slot_(n, 0) {
    for (std::size_t c = 0; c < couplets_.size(); ++c) {
        const auto& cp = couplets_[c];
        if (cp.i >= n || cp.l >= n) fail(ErrorCode::InvalidArgument, "couplet index out of range");
        if (cp.i == cp.l) fail(ErrorCode::InvalidArgument, "couplet pairs a point with itself");
        if (partner_[cp.i] != kNone || partner_[cp.l] != kNone)
            fail(ErrorCode::InvalidArgument,
                 "point " + std::to_string(partner_[cp.i] != kNone ? cp.i : cp.l) +
                     " appears in two couplets");
        partner_[cp.i] = cp.l;
        partner_[cp.l] = cp.i;
        slot_[cp.i] = slot_[cp.l] = c;
    }
}

std::optional<Index> CoupletSet::partner(Index i) const {
    const Index p = partner_.at(i);
    if (p == kNone) return std::nullopt;
    return p;
}

std::vector<Index> CoupletSet::paired() const {
    std::vector<Index> out;
    for (Index i = 0; i < n(); ++i)
        if (partner_[i] != kNone) out.push_back(i);
    return out;
}

std::vector<Index> CoupletSet::unpaired() const {
    std::vector<Index> out;
    for (Index i = 0; i < n(); ++i)
        if (partner_[i] == kNone) out.push_back(i);
    return out;
}

std::optional<double> CoupletSet::sparse_distance(Index i, Index l) const {
    if (i >= n() || l >= n() || partner_[i] != l) return std::nullopt;
    return couplets_[slot_[i]].dist;
}

namespace {

std::vector<Couplet> enforce_separation(const KdTree& tree, std::vector<Couplet> couplets,
                                        double separation, std::size_t n) {
    std::vector<bool> kept_member(n, false);
    std::vector<Couplet> kept;
    auto clear = [&](Index p) {
        for (const auto& nb : tree.within_radius(p, separation))
            if (kept_member[nb.index]) return false;
        return true;
    };
    for (const auto& c : couplets) {
        if (clear(c.i) && clear(c.l)) {
            kept_member[c.i] = kept_member[c.l] = true;
            kept.push_back(c);
        }
    }
    return kept;
}

} // namespace

CoupletSet pair_points(const PointSet& points, double radius, const PairingOptions& options) {
    const std::size_t n = points.size();
    if (n < 2) fail(ErrorCode::InsufficientPoints, "pairing needs at least two points");
    if (!(radius > 0.0)) fail(ErrorCode::InvalidRadius, "pairing radius must be positive");

    std::vector<Index> scan(n);
    std::iota(scan.begin(), scan.end(), Index{0});
    if (options.order == PairingOptions::Order::Shuffled) {
        std::mt19937_64 rng(options.shuffle_seed);
        std::shuffle(scan.begin(), scan.end(), rng);
    }

    const KdTree tree(points);
    std::vector<bool> paired(n, false);
    std::vector<Couplet> couplets;
    couplets.reserve(n / 2);

    for (const Index p : scan) {
        if (paired[p]) continue;
        // Two candidates first; widen geometrically while every returned
        // neighbor is already taken and the ball may hold more points.
        for (std::size_t k = 2;; k *= 2) {
            const auto nbrs = tree.nearest_neighbors(p, k, radius);
            const auto it = std::find_if(nbrs.begin(), nbrs.end(),
                                         [&](const Neighbor& nb) { return !paired[nb.index]; });
            if (it != nbrs.end()) {
                couplets.push_back({p, it->index, it->dist});
                paired[p] = paired[it->index] = true;
                break;
            }
            if (nbrs.size() < k || k >= n) break;
        }
    }

    if (options.min_separation)
        couplets = enforce_separation(tree, std::move(couplets), *options.min_separation, n);

    return CoupletSet(n, std::move(couplets));
}

PairingSummary pairing_report(const CoupletSet& cs) {
    PairingSummary s;
    s.n = cs.n();
    s.q = cs.q();
    s.unpaired = s.n - 2 * s.q;
    s.rate = s.n == 0 ? 0.0 : 2.0 * static_cast<double>(s.q) / static_cast<double>(s.n);
    if (s.q > 0) {
        double sum = 0.0, max = 0.0;
        for (const auto& c : cs.couplets()) {
            sum += c.dist;
            max = std::max(max, c.dist);
        }
        s.mean_dist = sum / static_cast<double>(s.q);
        s.max_dist = max;
    }
    return s;
}

void write_couplets_csv(const CoupletSet& cs, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "i,l,dist\n";
    for (const auto& c : cs.couplets()) out << c.i << ',' << c.l << ',' << csv::fmt(c.dist) << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

void write_unpaired_csv(const CoupletSet& cs, const std::filesystem::path& path) {
    auto out = csv::open_out(path);
    out << "id\n";
    for (const Index i : cs.unpaired()) out << i << '\n';
    if (!out) fail(ErrorCode::IoError, "write failed: " + path.string());
}

CoupletSet read_couplets_csv(const std::filesystem::path& path, std::size_t n) {
    const auto t = csv::read(path);
    if (t.header != std::vector<std::string>{"i", "l", "dist"})
        fail(ErrorCode::ParseError, path.string() + ": header must be i,l,dist");
    std::vector<Couplet> couplets;
    couplets.reserve(t.rows.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        couplets.push_back({csv::to_index(row[0], path, r + 2), csv::to_index(row[1], path, r + 2),
                            csv::to_double(row[2], path, r + 2)});
    }
    return CoupletSet(n, std::move(couplets));
}

} // namespace kdtpl
