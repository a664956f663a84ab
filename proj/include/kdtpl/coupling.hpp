#pragma once

#include "kdtpl/points.hpp"
#include "kdtpl/spatial_index.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kdtpl {

/// How the pairing radius is derived from the point set.
struct RadiusSpec {
    enum class Kind { Mean, Max, MeanPlusBuffer, Fixed };

    Kind kind = Kind::Mean;
    double value = 0.0; // buffer h for MeanPlusBuffer, the radius for Fixed

    static RadiusSpec mean() { return {Kind::Mean, 0.0}; }
    static RadiusSpec max() { return {Kind::Max, 0.0}; }
    static RadiusSpec mean_plus(double h);
    static RadiusSpec fixed(double r);

    /// Accepts `mean`, `max`, `mean+H` or a bare positive number.
    static RadiusSpec parse(std::string_view text);

    /// Inverse of parse().
    std::string label() const;

    friend bool operator==(const RadiusSpec&, const RadiusSpec&) = default;
};

double resolve_radius(const DistanceSummary& summary, const RadiusSpec& spec);
/// Summary mode defaults to DistanceMode::automatic(n).
double resolve_radius(const PointSet& points, const RadiusSpec& spec,
                      std::optional<DistanceMode> mode = std::nullopt);

struct Couplet {
    Index i = 0;
    Index l = 0;
    double dist = 0.0;

    friend bool operator==(const Couplet&, const Couplet&) = default;
};

/// Disjoint couplets over points 0..n-1 together with the sparse record of
/// the distance matrix (one symmetric entry per couplet).
class CoupletSet {
public:
    CoupletSet() = default;

    /// Validates i != l, indices < n and disjointness; throws InvalidArgument.
    CoupletSet(std::size_t n, std::vector<Couplet> couplets);

    std::size_t n() const noexcept { return partner_.size(); }
    std::size_t q() const noexcept { return couplets_.size(); }
    const std::vector<Couplet>& couplets() const noexcept { return couplets_; }

    bool is_paired(Index i) const { return partner_.at(i) != kNone; }
    std::optional<Index> partner(Index i) const;
    std::vector<Index> paired() const;
    std::vector<Index> unpaired() const;

    /// D[i,l] when (i, l) is a couplet in either orientation.
    std::optional<double> sparse_distance(Index i, Index l) const;

private:
    static constexpr Index kNone = static_cast<Index>(-1);

    std::vector<Couplet> couplets_;
    std::vector<Index> partner_;
    std::vector<std::size_t> slot_;
};

struct PairingOptions {
    enum class Order { Ascending, Shuffled };

    Order order = Order::Ascending;
    std::uint64_t shuffle_seed = 0;
    // Off by default. When set, couplets with a member closer than this to a
    // member of an earlier kept couplet are dropped.
    std::optional<double> min_separation;
};

/// Greedy coupling: each point, in scan order, takes its nearest unpaired
/// neighbor within `radius`. Throws InsufficientPoints for n < 2 and
/// InvalidRadius for a nonpositive radius.
CoupletSet pair_points(const PointSet& points, double radius, const PairingOptions& options = {});

struct PairingSummary {
    std::size_t n = 0;
    std::size_t q = 0;
    std::size_t unpaired = 0;
    double rate = 0.0; // 2q/n
    std::optional<double> mean_dist;
    std::optional<double> max_dist;
};

PairingSummary pairing_report(const CoupletSet& cs);

void write_couplets_csv(const CoupletSet& cs, const std::filesystem::path& path);
void write_unpaired_csv(const CoupletSet& cs, const std::filesystem::path& path);

/// Reads `i,l,dist` for a point set of size n.
CoupletSet read_couplets_csv(const std::filesystem::path& path, std::size_t n);

} // namespace kdtpl
