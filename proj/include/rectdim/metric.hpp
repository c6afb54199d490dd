#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rectdim/errors.hpp"

namespace rectdim {

using Index = std::int64_t;
using Point = std::vector<Index>;

/// Largest half-width any profile may realize. Keeps 2h+1 and small scalings
/// inside a signed 64-bit integer.
inline constexpr Index kMaxHalfwidth = Index{1} << 61;

enum class ProfileKind { linear, power, exponential, table };

/// Growth class of a profile: polynomial of the given exponent, or
/// exponential with unit rate. Used to weight coordinates in predictions.
struct GrowthRate {
    bool exponential = false;
    double exponent = 1.0;
};

/// One coordinate of a rectangular metric: r -> floor(f(r)), the half-width
/// of the ball of radius r along that axis.
class Profile {
public:
    static Profile linear(double slope);
    static Profile power(double exponent);
    static Profile exponential();
    static Profile table(std::vector<Index> values);

    ProfileKind kind() const noexcept { return kind_; }
    double param() const noexcept { return param_; }
    std::span<const Index> values() const noexcept { return table_; }

    /// floor(f(r)); throws RangeError past kMaxHalfwidth or past a table's end.
    Index halfwidth(Index r) const;

    /// Real value f(1), used to pick the coarse-dimension scale.
    double unit_value() const;

    /// Smallest r with halfwidth(r) >= gap.
    Index min_radius(Index gap) const;

    /// nullopt for tables, whose asymptotics are unknown.
    std::optional<GrowthRate> growth() const;

    std::string describe() const;

private:
    Profile(ProfileKind kind, double param) : kind_(kind), param_(param) {}

    bool at_least(Index r, Index gap) const;

    ProfileKind kind_;
    double param_;
    std::vector<Index> table_;
};

/// rho(u, v) = max_i F_i(|u_i - v_i|), stored through the inverses f_i.
/// Construction validates f(0) = 0, monotonicity and superadditivity over
/// radii up to `validation_range` (pairs whose sum is not representable are
/// skipped).
class RectangularMetric {
public:
    explicit RectangularMetric(std::vector<Profile> profiles, Index validation_range = 64);

    std::size_t dimension() const noexcept { return profiles_.size(); }
    const Profile& profile(std::size_t i) const { return profiles_.at(i); }
    const std::vector<Profile>& profiles() const noexcept { return profiles_; }

    std::vector<Index> halfwidths(Index r) const;
    Index distance(std::span<const Index> u, std::span<const Index> v) const;

    /// Smallest radius whose ball reaches an offset of `gap[i]` on every axis.
    Index radius_for_gaps(std::span<const Index> gaps) const;

private:
    std::vector<Profile> profiles_;
};

using MetricPtr = std::shared_ptr<const RectangularMetric>;

MetricPtr make_metric(std::vector<Profile> profiles, Index validation_range = 64);

/// A ball B_r(z), optionally scaled: lambda * B_r(z) has half-widths
/// lambda * floor(f_i(r)).
class Rectangle {
public:
    Rectangle(MetricPtr metric, Point center, Index radius, Index scale = 1);

    const RectangularMetric& metric() const noexcept { return *metric_; }
    const MetricPtr& metric_ptr() const noexcept { return metric_; }
    const Point& center() const noexcept { return center_; }
    Index radius() const noexcept { return radius_; }
    Index scale_factor() const noexcept { return scale_; }
    std::size_t dimension() const noexcept { return center_.size(); }

    const std::vector<Index>& halfwidths() const noexcept { return halfwidths_; }
    Point lower() const;
    Point upper() const;

    bool contains(std::span<const Index> z) const;
    Index cardinality() const;
    Rectangle scale(Index lambda) const;

    /// Membership in the t-boundary: points within rho-distance t of the
    /// lattice boundary of the rectangle. Requires scale 1.
    bool in_thick_boundary(Index t, std::span<const Index> z) const;
    Index thick_boundary_count(Index t) const;

private:
    MetricPtr metric_;
    Point center_;
    Index radius_;
    Index scale_;
    std::vector<Index> halfwidths_;
};

/// Same quantities as free functions for callers that only hold a metric.
std::vector<Index> ball_halfwidths(const RectangularMetric& metric, Index r);
Index distance(const RectangularMetric& metric, std::span<const Index> u, std::span<const Index> v);

/// Multiplies with a RangeError on signed overflow.
Index checked_mul(Index a, Index b);
Index checked_add(Index a, Index b);

}  // namespace rectdim
