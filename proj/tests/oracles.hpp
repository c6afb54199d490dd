#pragma once

// Brute-force references used by the unit and acceptance suites. Everything
// here enumerates lattice points directly and shares no code path with the
// closed forms it checks, beyond metric distance and the cocycle definition.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "rectdim/covering.hpp"
#include "rectdim/logsum.hpp"
#include "rectdim/metric.hpp"
#include "rectdim/odometer.hpp"
#include "rectdim/random.hpp"

namespace oracle {

using rectdim::Index;
using rectdim::Point;

// Calls fn(z) for every z with lo <= z <= hi (componentwise).
inline void for_each_point(const Point& lo, const Point& hi, const std::function<void(const Point&)>& fn) {
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (lo[i] > hi[i]) return;
    }
    Point z = lo;
    for (;;) {
        fn(z);
        std::size_t axis = 0;
        while (axis < z.size() && z[axis] == hi[axis]) z[axis] = lo[axis], ++axis;
        if (axis == z.size()) return;
        ++z[axis];
    }
}

inline std::vector<Point> ball_points(const rectdim::RectangularMetric& m, const Point& c, Index r) {
    std::vector<Point> out;
    const auto h = m.halfwidths(r);
    Point lo = c, hi = c;
    for (std::size_t i = 0; i < c.size(); ++i) lo[i] -= h[i], hi[i] += h[i];
    for_each_point(lo, hi, [&](const Point& z) { out.push_back(z); });
    return out;
}

// Lattice points of the box with some coordinate at an extreme.
inline std::vector<Point> box_points(const rectdim::Rectangle& b) {
    std::vector<Point> out;
    const Point lo = b.lower(), hi = b.upper();
    for_each_point(lo, hi, [&](const Point& z) {
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z[i] == lo[i] || z[i] == hi[i]) {
                out.push_back(z);
                return;
            }
        }
    });
    return out;
}

// The set of u + B_t over boundary points u, painted into a bitmap over the
// box [lower - tau, upper + tau].
class ThickBoundary {
public:
    ThickBoundary(const rectdim::Rectangle& b, Index t) {
        const auto& m = b.metric();
        const auto tau = m.halfwidths(t);
        const std::size_t d = b.dimension();
        lo_ = b.lower();
        hi_ = b.upper();
        for (std::size_t i = 0; i < d; ++i) lo_[i] -= tau[i], hi_[i] += tau[i];
        stride_.assign(d, 1);
        std::size_t cells = 1;
        for (std::size_t i = 0; i < d; ++i) {
            stride_[i] = static_cast<Index>(cells);
            cells *= static_cast<std::size_t>(hi_[i] - lo_[i] + 1);
        }
        mark_.assign(cells, 0);
        std::vector<Index> deltas;
        Point tlo(d), thi(d);
        for (std::size_t i = 0; i < d; ++i) tlo[i] = -tau[i], thi[i] = tau[i];
        for_each_point(tlo, thi, [&](const Point& off) {
            Index k = 0;
            for (std::size_t i = 0; i < d; ++i) k += off[i] * stride_[i];
            deltas.push_back(k);
        });
        for (const auto& u : box_points(b)) {
            const Index base = flat(u);
            for (Index k : deltas) mark_[static_cast<std::size_t>(base + k)] = 1;
        }
    }

    const Point& lower() const { return lo_; }
    const Point& upper() const { return hi_; }

    bool contains(const Point& z) const {
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (z[i] < lo_[i] || z[i] > hi_[i]) return false;
        }
        return mark_[static_cast<std::size_t>(flat(z))] != 0;
    }

    Index count() const {
        Index n = 0;
        for (auto v : mark_) n += v;
        return n;
    }

private:
    Index flat(const Point& z) const {
        Index k = 0;
        for (std::size_t i = 0; i < z.size(); ++i) k += (z[i] - lo_[i]) * stride_[i];
        return k;
    }

    Point lo_, hi_;
    std::vector<Index> stride_;
    std::vector<std::uint8_t> mark_;
};

inline bool in_thick_boundary(const rectdim::Rectangle& b, Index t, const Point& z) {
    return ThickBoundary(b, t).contains(z);
}

inline Index thick_boundary_count(const rectdim::Rectangle& b, Index t) { return ThickBoundary(b, t).count(); }

// log sum over u in B_n of omega_u(x), one lattice point at a time through
// the cocycle definition (apply_power + changed digits).
inline double rect_log_sum(const rectdim::ProductSystem& s, const rectdim::ProductPoint& x,
                           const rectdim::RectangularMetric& m, Index n) {
    rectdim::LogSumExp acc;
    for (const auto& u : ball_points(m, Point(m.dimension(), 0), n)) acc.add(s.log_cocycle(x, u));
    return acc.value();
}

// log sum over a list of lattice points with a cylinder weight.
inline double log_sum_over(const rectdim::ProductSystem& s, const rectdim::ProductPoint& x,
                           const std::vector<Point>& pts, const rectdim::CylinderFunction* phi = nullptr) {
    rectdim::LogSumExp acc;
    for (const auto& u : pts) {
        if (phi && !(*phi)(s.apply(x, u))) continue;
        acc.add(s.log_cocycle(x, u));
    }
    return acc.value();
}

inline std::size_t multiplicity(const std::vector<rectdim::Rectangle>& balls) {
    if (balls.empty()) return 0;
    Point lo = balls.front().lower(), hi = balls.front().upper();
    for (const auto& b : balls) {
        const Point l = b.lower(), h = b.upper();
        for (std::size_t i = 0; i < lo.size(); ++i) lo[i] = std::min(lo[i], l[i]), hi[i] = std::max(hi[i], h[i]);
    }
    std::size_t best = 0;
    for_each_point(lo, hi, [&](const Point& z) {
        std::size_t k = 0;
        for (const auto& b : balls) k += b.contains(z) ? 1 : 0;
        best = std::max(best, k);
    });
    return best;
}

inline Index set_distance(const rectdim::RectangularMetric& m, const std::vector<Point>& a,
                          const std::vector<Point>& b) {
    Index best = -1;
    for (const auto& u : a) {
        for (const auto& v : b) {
            const Index r = m.distance(u, v);
            if (best < 0 || r < best) best = r;
        }
    }
    return best;
}

// min over u in a of rho(u, b), the nearest point of b to u found by clamping
// each coordinate. Enumerates the smaller ball.
inline Index ball_distance(const rectdim::Rectangle& a, const rectdim::Rectangle& b) {
    if (a.cardinality() > b.cardinality()) return oracle::ball_distance(b, a);
    const Point lo = b.lower(), hi = b.upper();
    Index best = -1;
    for_each_point(a.lower(), a.upper(), [&](const Point& u) {
        Point v = u;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
        const Index r = a.metric().distance(u, v);
        if (best < 0 || r < best) best = r;
    });
    return best;
}

// Pairwise point-to-point check of well-separation, balls given as point sets.
inline bool well_separated(const rectdim::RectangularMetric& m, const std::vector<std::vector<Point>>& sets,
                           Index rmin) {
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) {
            if (set_distance(m, sets[i], sets[j]) <= rmin) return false;
        }
    }
    return true;
}

}  // namespace oracle
