#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rectdim/metric.hpp"

namespace rectdim {

/// Finite family of balls over a finite set E; ball i is B_{radii[i]}(points[i]).
class Carpet {
public:
    Carpet(MetricPtr metric, std::vector<Point> points, std::vector<Index> radii);

    const MetricPtr& metric() const noexcept { return metric_; }
    std::size_t size() const noexcept { return points_.size(); }
    std::size_t dimension() const noexcept { return metric_->dimension(); }
    const std::vector<Point>& points() const noexcept { return points_; }
    const std::vector<Index>& radii() const noexcept { return radii_; }

    Rectangle ball(std::size_t i) const;
    std::vector<Rectangle> balls(std::span<const std::size_t> indices) const;

    Index rmin() const;
    Index rmax() const;

private:
    MetricPtr metric_;
    std::vector<Point> points_;
    std::vector<Index> radii_;
};

/// Finite measure on lattice points, given by positive point masses.
class DiscreteMassFunction {
public:
    DiscreteMassFunction(std::vector<Point> support, std::vector<double> weights);

    static DiscreteMassFunction uniform(std::vector<Point> support);

    const std::vector<Point>& support() const noexcept { return support_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double total() const noexcept { return total_; }

    /// Mass of the support points satisfying `inside`.
    template <class Pred>
    double mass_where(Pred inside) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < support_.size(); ++i) {
            if (inside(support_[i])) acc += weights_[i];
        }
        return acc;
    }

    /// Throws ArgumentError unless every support point lies in `points`.
    void require_supported_on(const std::vector<Point>& points) const;

private:
    std::vector<Point> support_;
    std::vector<double> weights_;
    double total_ = 0.0;
};

/// Carpets U_0, ..., U_{p-1} over one set F with rmin U_i >= 2 rmax U_{i-1}.
class Stack {
public:
    explicit Stack(std::vector<Carpet> carpets);

    std::size_t height() const noexcept { return carpets_.size(); }
    const Carpet& level(std::size_t i) const { return carpets_.at(i); }
    const std::vector<Point>& base() const noexcept { return carpets_.front().points(); }

private:
    std::vector<Carpet> carpets_;
};

struct BallRef {
    std::size_t level = 0;
    std::size_t index = 0;
    friend bool operator==(const BallRef&, const BallRef&) = default;
};

// ------------------------------------------------------------- covering

/// Greedy incremental subsequence: balls by non-increasing radius (ties to the
/// lower index), keeping each one whose center is not yet covered.
std::vector<std::size_t> incremental_subcarpet(const Carpet& carpet);

/// Largest number of balls sharing a lattice point. Throws SizeError when
/// the sweep exceeds `work_limit` candidate points.
std::size_t multiplicity(const std::vector<Rectangle>& balls, std::size_t work_limit = 50'000'000);

/// min over point pairs of rho, in closed form.
Index ball_distance(const Rectangle& a, const Rectangle& b);

/// Same for the boxes (lattice boundaries) of two balls.
Index box_distance(const Rectangle& a, const Rectangle& b);

/// Any two members more than rmin apart.
bool is_well_separated(const std::vector<Rectangle>& balls);
bool is_box_well_separated(const std::vector<Rectangle>& balls);

/// 2^{3d} + 1.
std::size_t coloring_bound(std::size_t dimension);

struct Coloring {
    std::vector<std::size_t> order;                 // incremental subsequence, carpet indices
    std::vector<std::size_t> color;                 // color of order[k], 0-based
    std::vector<std::vector<std::size_t>> classes;  // carpet indices per color
};

/// Colors a sequence of carpet balls: ball k+1 (center z) gets the lowest
/// color not used by earlier balls meeting z + 2B_r, r the radius of ball k.
Coloring color_sequence(const Carpet& carpet, std::vector<std::size_t> order);

/// color_sequence over incremental_subcarpet.
Coloring well_separated_coloring(const Carpet& carpet);

struct MassSelection {
    std::vector<std::size_t> balls;
    double covered = 0.0;
    double total = 0.0;
};

/// Best color class by covered mass (ties to the lower color).
MassSelection mass_cover_selection(const Carpet& carpet, const DiscreteMassFunction& mass);

// ---------------------------------------------------------------- stacks

struct StackReport {
    bool separated = false;  // boxes pairwise more than rmin apart
    bool covers_half = false;
    double covered = 0.0;
    double total = 0.0;
    bool ok() const noexcept { return separated && covers_half; }
};

/// Checks (i) the boxes of the selection are well-separated and (ii) the union
/// of their 2r-boundaries, r = rmax of level k-1, carries more than half of the
/// mass. Levels are 0-based, so 1 <= k < height; rmin of level 0 must be at
/// least 2t.
StackReport verify_stack_selection(const Stack& stack, const DiscreteMassFunction& mass,
                                   const std::vector<BallRef>& selection, std::size_t k, Index t);

struct StackSelection {
    std::size_t k = 0;
    std::vector<BallRef> balls;
};

/// Exhaustive search over k and subsets of the levels >= k. Throws SizeError
/// beyond `max_balls` candidates at any k.
std::optional<StackSelection> search_stack_selection(const Stack& stack, const DiscreteMassFunction& mass, Index t,
                                                     std::size_t max_balls = 20);

// ----------------------------------------------------- coarse dimension

struct ChainLink {
    Point center;
    Index radius = 0;
    Index thickness = 0;
};

/// True iff no point of `search_box` lies in every t_i-boundary of the chain.
/// Each center must lie in the thick boundaries of its predecessors.
bool boundary_chain_check(const MetricPtr& metric, const std::vector<ChainLink>& chain,
                          const Rectangle& search_box, Index max_points = 20'000'000);

/// 5 max(1, ceil(max_i 1 / f_i(1))) + 1.
Index coarse_scale(const RectangularMetric& metric);

// -------------------------------------------------------- generation, io

struct CarpetShape {
    std::size_t points = 50;
    Index span = 20;        // coordinates in [-span, span]
    Index max_radius = 16;  // radii in [0, max_radius]
};

/// Distinct random points with random radii, reproducible from the seed.
Carpet random_carpet(const MetricPtr& metric, const CarpetShape& shape, std::uint64_t seed);

/// One record per ball: "d r z_1 ... z_d".
void write_carpet(std::ostream& out, const Carpet& carpet);
Carpet read_carpet(std::istream& in, const MetricPtr& metric);

}  // namespace rectdim
