#include "rectdim/metric.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace rectdim {

namespace {

// Floor of a positive extended-precision value, nudged up by half an ulp so a
// value that should be an exact integer is not floored one below it.
Index guarded_floor(long double v) {
    if (!(v < static_cast<long double>(kMaxHalfwidth))) {
        throw RangeError("profile value exceeds representable half-width");
    }
    const long double ulp = std::nextafterl(v, std::numeric_limits<long double>::infinity()) - v;
    return static_cast<Index>(std::floor(v + ulp / 2));
}

bool is_integral(double x) { return std::floor(x) == x; }

std::uint64_t abs_diff(Index a, Index b) {
    return a >= b ? static_cast<std::uint64_t>(a) - static_cast<std::uint64_t>(b)
                  : static_cast<std::uint64_t>(b) - static_cast<std::uint64_t>(a);
}

}  // namespace

Index checked_mul(Index a, Index b) {
    Index out = 0;
    if (__builtin_mul_overflow(a, b, &out)) throw RangeError("integer overflow in product");
    return out;
}

Index checked_add(Index a, Index b) {
    Index out = 0;
    if (__builtin_add_overflow(a, b, &out)) throw RangeError("integer overflow in sum");
    return out;
}

// ---------------------------------------------------------------- Profile

Profile Profile::linear(double slope) {
    if (!(slope >= 1.0) || !std::isfinite(slope)) {
        throw ArgumentError("linear profile requires slope >= 1");
    }
    return Profile(ProfileKind::linear, slope);
}

Profile Profile::power(double exponent) {
    if (!(exponent >= 1.0) || !std::isfinite(exponent)) {
        throw ArgumentError("power profile requires exponent >= 1");
    }
    return Profile(ProfileKind::power, exponent);
}

Profile Profile::exponential() { return Profile(ProfileKind::exponential, 1.0); }

Profile Profile::table(std::vector<Index> values) {
    if (values.size() < 2) throw ArgumentError("table profile needs at least radii 0 and 1");
    if (values[0] != 0) throw ArgumentError("table profile must map radius 0 to 0");
    for (std::size_t r = 1; r < values.size(); ++r) {
        if (values[r] <= values[r - 1]) {
            throw ArgumentError("table profile must be strictly increasing");
        }
        if (values[r] > kMaxHalfwidth) throw ArgumentError("table value exceeds representable range");
    }
    Profile p(ProfileKind::table, 0.0);
    p.table_ = std::move(values);
    return p;
}

Index Profile::halfwidth(Index r) const {
    if (r < 0) throw ArgumentError("radius must be non-negative");
    if (r == 0) return 0;
    switch (kind_) {
        case ProfileKind::linear:
            if (is_integral(param_)) {
                const Index h = checked_mul(static_cast<Index>(param_), r);
                if (h > kMaxHalfwidth) throw RangeError("profile value exceeds representable half-width");
                return h;
            }
            return guarded_floor(static_cast<long double>(param_) * static_cast<long double>(r));
        case ProfileKind::power:
            if (is_integral(param_) && param_ <= 64) {
                Index h = 1;
                for (int k = 0; k < static_cast<int>(param_); ++k) {
                    h = checked_mul(h, r);
                    if (h > kMaxHalfwidth) throw RangeError("profile value exceeds representable half-width");
                }
                return h;
            }
            return guarded_floor(std::pow(static_cast<long double>(r), static_cast<long double>(param_)));
        case ProfileKind::exponential:
            if (r > 64) throw RangeError("profile value exceeds representable half-width");
            return guarded_floor(std::expm1(static_cast<long double>(r)));
        case ProfileKind::table:
            if (static_cast<std::uint64_t>(r) >= table_.size()) {
                throw RangeError("radius beyond the end of a table profile");
            }
            return table_[static_cast<std::size_t>(r)];
    }
    return 0;
}

double Profile::unit_value() const {
    switch (kind_) {
        case ProfileKind::linear: return param_;
        case ProfileKind::power: return 1.0;
        case ProfileKind::exponential: return std::expm1(1.0);
        case ProfileKind::table: return static_cast<double>(table_[1]);
    }
    return 1.0;
}

bool Profile::at_least(Index r, Index gap) const {
    try {
        return halfwidth(r) >= gap;
    } catch (const RangeError&) {
        if (kind_ == ProfileKind::table) throw;
        return true;
    }
}

Index Profile::min_radius(Index gap) const {
    if (gap <= 0) return 0;
    if (gap > kMaxHalfwidth) throw RangeError("offset exceeds representable half-width");
    Index hi = 1;
    while (!at_least(hi, gap)) {
        if (hi > kMaxHalfwidth / 2) throw RangeError("no representable radius covers the offset");
        hi *= 2;
    }
    Index lo = hi / 2;  // at_least(lo) is false unless hi == 1
    if (hi == 1) return 1;
    while (hi - lo > 1) {
        const Index mid = lo + (hi - lo) / 2;
        if (at_least(mid, gap)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

std::optional<GrowthRate> Profile::growth() const {
    switch (kind_) {
        case ProfileKind::linear: return GrowthRate{false, 1.0};
        case ProfileKind::power: return GrowthRate{false, param_};
        case ProfileKind::exponential: return GrowthRate{true, 1.0};
        case ProfileKind::table: return std::nullopt;
    }
    return std::nullopt;
}

std::string Profile::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case ProfileKind::linear: os << "linear(" << param_ << ")"; break;
        case ProfileKind::power: os << "power(" << param_ << ")"; break;
        case ProfileKind::exponential: os << "exp"; break;
        case ProfileKind::table: os << "table[" << table_.size() << "]"; break;
    }
    return os.str();
}

// ------------------------------------------------------ RectangularMetric

RectangularMetric::RectangularMetric(std::vector<Profile> profiles, Index validation_range)
    : profiles_(std::move(profiles)) {
    if (profiles_.empty()) throw ArgumentError("metric needs at least one coordinate");
    for (std::size_t i = 0; i < profiles_.size(); ++i) {
        const Profile& p = profiles_[i];
        const auto fail = [&](const std::string& what) {
            throw ArgumentError("coordinate " + std::to_string(i) + " (" + p.describe() + "): " + what);
        };
        Index limit = validation_range;
        if (p.kind() == ProfileKind::table) {
            limit = std::min<Index>(limit, static_cast<Index>(p.values().size()) - 1);
        }
        std::vector<Index> h;
        h.reserve(static_cast<std::size_t>(2 * limit + 1));
        for (Index r = 0; r <= 2 * limit; ++r) {
            try {
                h.push_back(p.halfwidth(r));
            } catch (const RangeError&) {
                break;
            }
        }
        if (h.empty() || h[0] != 0) fail("f(0) must be 0");
        for (std::size_t r = 1; r < h.size(); ++r) {
            if (h[r] < h[r - 1]) fail("half-widths must be non-decreasing");
        }
        if (h.size() > 1 && h[1] < 1) fail("f(1) must be at least 1");
        const auto known = static_cast<Index>(h.size());
        for (Index a = 1; a <= limit && a < known; ++a) {
            if (h[static_cast<std::size_t>(a)] < a * h[1]) fail("f(n) >= n f(1) violated");
            for (Index b = a; b <= limit && a + b < known; ++b) {
                if (h[static_cast<std::size_t>(a + b)] <
                    h[static_cast<std::size_t>(a)] + h[static_cast<std::size_t>(b)]) {
                    fail("profile is not superadditive at (" + std::to_string(a) + ", " +
                         std::to_string(b) + ")");
                }
            }
        }
    }
}

std::vector<Index> RectangularMetric::halfwidths(Index r) const {
    if (r < 0) throw ArgumentError("radius must be non-negative");
    std::vector<Index> out;
    out.reserve(profiles_.size());
    for (const auto& p : profiles_) out.push_back(p.halfwidth(r));
    return out;
}

Index RectangularMetric::radius_for_gaps(std::span<const Index> gaps) const {
    if (gaps.size() != profiles_.size()) throw ArgumentError("dimension mismatch");
    Index r = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) r = std::max(r, profiles_[i].min_radius(gaps[i]));
    return r;
}

Index RectangularMetric::distance(std::span<const Index> u, std::span<const Index> v) const {
    if (u.size() != profiles_.size() || v.size() != profiles_.size()) {
        throw ArgumentError("dimension mismatch");
    }
    Index r = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const std::uint64_t gap = abs_diff(u[i], v[i]);
        if (gap > static_cast<std::uint64_t>(kMaxHalfwidth)) throw RangeError("offset out of range");
        r = std::max(r, profiles_[i].min_radius(static_cast<Index>(gap)));
    }
    return r;
}

MetricPtr make_metric(std::vector<Profile> profiles, Index validation_range) {
    return std::make_shared<const RectangularMetric>(std::move(profiles), validation_range);
}

std::vector<Index> ball_halfwidths(const RectangularMetric& metric, Index r) { return metric.halfwidths(r); }

Index distance(const RectangularMetric& metric, std::span<const Index> u, std::span<const Index> v) {
    return metric.distance(u, v);
}

// -------------------------------------------------------------- Rectangle

Rectangle::Rectangle(MetricPtr metric, Point center, Index radius, Index scale)
    : metric_(std::move(metric)), center_(std::move(center)), radius_(radius), scale_(scale) {
    if (!metric_) throw ArgumentError("rectangle needs a metric");
    if (center_.size() != metric_->dimension()) throw ArgumentError("center has wrong dimension");
    if (radius_ < 0) throw ArgumentError("radius must be non-negative");
    if (scale_ < 1) throw ArgumentError("scale must be a positive integer");
    halfwidths_ = metric_->halfwidths(radius_);
    for (auto& h : halfwidths_) h = checked_mul(h, scale_);
}

Point Rectangle::lower() const {
    Point out(center_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = checked_add(center_[i], -halfwidths_[i]);
    return out;
}

Point Rectangle::upper() const {
    Point out(center_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = checked_add(center_[i], halfwidths_[i]);
    return out;
}

bool Rectangle::contains(std::span<const Index> z) const {
    if (z.size() != center_.size()) throw ArgumentError("dimension mismatch");
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (abs_diff(z[i], center_[i]) > static_cast<std::uint64_t>(halfwidths_[i])) return false;
    }
    return true;
}

Index Rectangle::cardinality() const {
    Index n = 1;
    for (Index h : halfwidths_) n = checked_mul(n, checked_add(checked_mul(2, h), 1));
    return n;
}

Rectangle Rectangle::scale(Index lambda) const {
    if (lambda < 1) throw ArgumentError("scale must be a positive integer");
    return Rectangle(metric_, center_, radius_, checked_mul(scale_, lambda));
}

bool Rectangle::in_thick_boundary(Index t, std::span<const Index> z) const {
    if (scale_ != 1) throw ArgumentError("thick boundary is defined for unscaled rectangles");
    if (t < 0) throw ArgumentError("thickness must be non-negative");
    if (z.size() != center_.size()) throw ArgumentError("dimension mismatch");
    bool near_face = false;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const Index tau = metric_->profile(i).halfwidth(t);
        const std::uint64_t off = abs_diff(z[i], center_[i]);
        const auto h = static_cast<std::uint64_t>(halfwidths_[i]);
        if (off > h + static_cast<std::uint64_t>(tau)) return false;
        if (static_cast<Index>(off) >= halfwidths_[i] - tau) near_face = true;
    }
    return near_face;
}

Index Rectangle::thick_boundary_count(Index t) const {
    if (scale_ != 1) throw ArgumentError("thick boundary is defined for unscaled rectangles");
    if (t < 0) throw ArgumentError("thickness must be non-negative");
    Index outer = 1;
    Index inner = 1;
    for (std::size_t i = 0; i < halfwidths_.size(); ++i) {
        const Index tau = metric_->profile(i).halfwidth(t);
        const Index h = halfwidths_[i];
        outer = checked_mul(outer, checked_add(checked_mul(2, checked_add(h, tau)), 1));
        inner = checked_mul(inner, std::max<Index>(0, 2 * (h - tau) - 1));
    }
    return outer - inner;
}

}  // namespace rectdim
