#include "rectdim/covering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

#include "rectdim/random.hpp"

namespace rectdim {

namespace {

// Solid axis-aligned box of lattice points.
struct Box {
    Point lo, hi;
};

Box box_of(const Rectangle& r) { return {r.lower(), r.upper()}; }

Index gap_distance(const RectangularMetric& metric, const Box& a, const Box& b) {
    std::vector<Index> gaps(a.lo.size());
    for (std::size_t i = 0; i < gaps.size(); ++i) gaps[i] = std::max<Index>({0, b.lo[i] - a.hi[i], a.lo[i] - b.hi[i]});
    return metric.radius_for_gaps(gaps);
}

bool boxes_meet(const Box& a, const Box& b) {
    for (std::size_t i = 0; i < a.lo.size(); ++i) {
        if (a.hi[i] < b.lo[i] || b.hi[i] < a.lo[i]) return false;
    }
    return true;
}

// The lattice boundary of a box as the union of its 2d faces.
std::vector<Box> faces(const Box& b) {
    std::vector<Box> out;
    for (std::size_t i = 0; i < b.lo.size(); ++i) {
        Box lo = b, hi = b;
        lo.hi[i] = b.lo[i];
        hi.lo[i] = b.hi[i];
        out.push_back(lo);
        if (b.hi[i] != b.lo[i]) out.push_back(hi);
    }
    return out;
}

Index min_radius(const std::vector<Rectangle>& balls) {
    Index r = balls.front().radius();
    for (const auto& b : balls) r = std::min(r, b.radius());
    return r;
}

}  // namespace

// ------------------------------------------------------------------ Carpet

Carpet::Carpet(MetricPtr metric, std::vector<Point> points, std::vector<Index> radii)
    : metric_(std::move(metric)), points_(std::move(points)), radii_(std::move(radii)) {
    if (!metric_) throw ArgumentError("carpet needs a metric");
    if (points_.empty()) throw ArgumentError("carpet must contain at least one ball");
    if (points_.size() != radii_.size()) throw ArgumentError("carpet needs one radius per point");
    std::set<Point> seen;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].size() != metric_->dimension()) throw ArgumentError("carpet point has wrong dimension");
        if (radii_[i] < 0) throw ArgumentError("carpet radii must be non-negative");
        if (!seen.insert(points_[i]).second) throw ArgumentError("carpet points must be distinct");
    }
}

Rectangle Carpet::ball(std::size_t i) const { return Rectangle(metric_, points_.at(i), radii_.at(i)); }

std::vector<Rectangle> Carpet::balls(std::span<const std::size_t> indices) const {
    std::vector<Rectangle> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(ball(i));
    return out;
}

Index Carpet::rmin() const { return *std::min_element(radii_.begin(), radii_.end()); }
Index Carpet::rmax() const { return *std::max_element(radii_.begin(), radii_.end()); }

// ---------------------------------------------------- DiscreteMassFunction

DiscreteMassFunction::DiscreteMassFunction(std::vector<Point> support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
    if (support_.size() != weights_.size()) throw ArgumentError("mass needs one weight per support point");
    if (support_.empty()) throw ArgumentError("mass support must be non-empty");
    for (double w : weights_) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ArgumentError("point masses must be positive and finite");
        total_ += w;
    }
}

DiscreteMassFunction DiscreteMassFunction::uniform(std::vector<Point> support) {
    std::vector<double> w(support.size(), 1.0);
    return DiscreteMassFunction(std::move(support), std::move(w));
}

void DiscreteMassFunction::require_supported_on(const std::vector<Point>& points) const {
    const std::set<Point> base(points.begin(), points.end());
    for (const auto& p : support_) {
        if (!base.contains(p)) throw ArgumentError("mass is not supported on the base set");
    }
}

// ------------------------------------------------------------------- Stack

Stack::Stack(std::vector<Carpet> carpets) : carpets_(std::move(carpets)) {
    if (carpets_.empty()) throw ArgumentError("stack needs at least one carpet");
    for (std::size_t i = 1; i < carpets_.size(); ++i) {
        if (carpets_[i].points() != carpets_[0].points()) throw ArgumentError("stack carpets must share one base set");
        if (carpets_[i].dimension() != carpets_[0].dimension()) throw ArgumentError("stack carpets differ in dimension");
        if (carpets_[i].rmin() < 2 * carpets_[i - 1].rmax()) {
            throw ArgumentError("stack needs rmin of each level >= 2 rmax of the previous one");
        }
    }
}

// ---------------------------------------------------------------- covering

std::vector<std::size_t> incremental_subcarpet(const Carpet& carpet) {
    std::vector<std::size_t> order(carpet.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return carpet.radii()[a] > carpet.radii()[b]; });
    std::vector<std::size_t> chosen;
    std::vector<Rectangle> balls;
    for (std::size_t i : order) {
        const Point& z = carpet.points()[i];
        const bool covered = std::any_of(balls.begin(), balls.end(), [&](const Rectangle& b) { return b.contains(z); });
        if (covered) continue;
        chosen.push_back(i);
        balls.push_back(carpet.ball(i));
    }
    return chosen;
}

std::size_t multiplicity(const std::vector<Rectangle>& balls, std::size_t work_limit) {
    if (balls.empty()) return 0;
    const std::size_t d = balls.front().dimension();
    std::vector<Box> boxes;
    boxes.reserve(balls.size());
    for (const auto& b : balls) {
        if (b.dimension() != d) throw ArgumentError("balls differ in dimension");
        boxes.push_back(box_of(b));
    }

    // A deepest point can be pushed down, coordinate by coordinate, to the
    // largest lower corner among the boxes holding it, so candidates are
    // lower-corner coordinates only.
    std::size_t best = 0;
    std::size_t work = 0;
    std::function<void(std::size_t, const std::vector<const Box*>&)> sweep =
        [&](std::size_t axis, const std::vector<const Box*>& active) {
            if (active.size() <= best) return;
            if (axis == d) {
                best = active.size();
                return;
            }
            std::vector<Index> cand;
            cand.reserve(active.size());
            for (const Box* b : active) cand.push_back(b->lo[axis]);
            std::sort(cand.begin(), cand.end());
            cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
            std::vector<const Box*> sub;
            for (Index v : cand) {
                sub.clear();
                for (const Box* b : active) {
                    if (b->lo[axis] <= v && v <= b->hi[axis]) sub.push_back(b);
                }
                work += sub.size() + 1;
                if (work > work_limit) throw SizeError("multiplicity sweep exceeds the work limit");
                sweep(axis + 1, sub);
            }
        };
    std::vector<const Box*> all;
    for (const auto& b : boxes) all.push_back(&b);
    sweep(0, all);
    return best;
}

Index ball_distance(const Rectangle& a, const Rectangle& b) {
    if (a.dimension() != b.dimension()) throw ArgumentError("balls differ in dimension");
    return gap_distance(a.metric(), box_of(a), box_of(b));
}

Index box_distance(const Rectangle& a, const Rectangle& b) {
    if (a.dimension() != b.dimension()) throw ArgumentError("balls differ in dimension");
    Index best = -1;
    for (const auto& fa : faces(box_of(a))) {
        for (const auto& fb : faces(box_of(b))) {
            const Index r = gap_distance(a.metric(), fa, fb);
            if (best < 0 || r < best) best = r;
            if (best == 0) return 0;
        }
    }
    return best;
}

bool is_well_separated(const std::vector<Rectangle>& balls) {
    if (balls.size() < 2) return true;
    const Index r = min_radius(balls);
    for (std::size_t i = 0; i < balls.size(); ++i) {
        for (std::size_t j = i + 1; j < balls.size(); ++j) {
            if (ball_distance(balls[i], balls[j]) <= r) return false;
        }
    }
    return true;
}

bool is_box_well_separated(const std::vector<Rectangle>& balls) {
    if (balls.size() < 2) return true;
    const Index r = min_radius(balls);
    for (std::size_t i = 0; i < balls.size(); ++i) {
        for (std::size_t j = i + 1; j < balls.size(); ++j) {
            if (box_distance(balls[i], balls[j]) <= r) return false;
        }
    }
    return true;
}

std::size_t coloring_bound(std::size_t dimension) { return (std::size_t{1} << (3 * dimension)) + 1; }

Coloring well_separated_coloring(const Carpet& carpet) { return color_sequence(carpet, incremental_subcarpet(carpet)); }

Coloring color_sequence(const Carpet& carpet, std::vector<std::size_t> order) {
    Coloring out;
    for (std::size_t i : order) {
        if (i >= carpet.size()) throw ArgumentError("sequence references a missing ball");
    }
    out.order = std::move(order);
    std::vector<Box> boxes;
    for (std::size_t k = 0; k < out.order.size(); ++k) {
        const std::size_t idx = out.order[k];
        boxes.push_back(box_of(carpet.ball(idx)));
        std::size_t color = 0;
        if (k > 0) {
            const Index r = carpet.radii()[out.order[k - 1]];
            const Box near = box_of(Rectangle(carpet.metric(), carpet.points()[idx], r, 2));
            std::vector<bool> used(k + 1, false);
            for (std::size_t i = 0; i < k; ++i) {
                if (boxes_meet(boxes[i], near) && out.color[i] <= k) used[out.color[i]] = true;
            }
            while (used[color]) ++color;
        }
        out.color.push_back(color);
        if (color >= out.classes.size()) out.classes.resize(color + 1);
        out.classes[color].push_back(idx);
    }
    return out;
}

MassSelection mass_cover_selection(const Carpet& carpet, const DiscreteMassFunction& mass) {
    mass.require_supported_on(carpet.points());
    const Coloring coloring = well_separated_coloring(carpet);
    MassSelection best;
    best.total = mass.total();
    best.covered = -1.0;
    for (const auto& cls : coloring.classes) {
        const auto balls = carpet.balls(cls);
        const double covered = mass.mass_where([&](const Point& z) {
            return std::any_of(balls.begin(), balls.end(), [&](const Rectangle& b) { return b.contains(z); });
        });
        if (covered > best.covered) {
            best.covered = covered;
            best.balls = cls;
        }
    }
    return best;
}

// ------------------------------------------------------------------ stacks

namespace {

void check_stack_inputs(const Stack& stack, const DiscreteMassFunction& mass, std::size_t k, Index t) {
    if (t < 0) throw ArgumentError("thickness must be non-negative");
    if (stack.level(0).rmin() < 2 * t) throw ArgumentError("stack needs rmin of the first level >= 2t");
    if (k < 1 || k >= stack.height()) throw ArgumentError("level k must satisfy 1 <= k < height");
    mass.require_supported_on(stack.base());
}

struct Candidate {
    Rectangle ball;
    std::vector<bool> covers;  // per support point of the mass
};

StackReport evaluate(const std::vector<const Candidate*>& chosen, const DiscreteMassFunction& mass) {
    StackReport rep;
    rep.total = mass.total();
    std::vector<Rectangle> balls;
    for (const Candidate* c : chosen) balls.push_back(c->ball);
    rep.separated = is_box_well_separated(balls);
    for (std::size_t p = 0; p < mass.support().size(); ++p) {
        const bool hit = std::any_of(chosen.begin(), chosen.end(), [p](const Candidate* c) { return c->covers[p]; });
        if (hit) rep.covered += mass.weights()[p];
    }
    rep.covers_half = rep.covered > 0.5 * rep.total;
    return rep;
}

Candidate make_candidate(const Stack& stack, const DiscreteMassFunction& mass, const BallRef& ref, Index r) {
    Candidate c{stack.level(ref.level).ball(ref.index), {}};
    for (const auto& z : mass.support()) c.covers.push_back(c.ball.in_thick_boundary(2 * r, z));
    return c;
}

}  // namespace

StackReport verify_stack_selection(const Stack& stack, const DiscreteMassFunction& mass,
                                   const std::vector<BallRef>& selection, std::size_t k, Index t) {
    check_stack_inputs(stack, mass, k, t);
    const Index r = stack.level(k - 1).rmax();
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < selection.size(); ++i) {
        const BallRef& ref = selection[i];
        if (ref.level < k) throw ArgumentError("selection references a ball below level k");
        if (ref.level >= stack.height() || ref.index >= stack.level(ref.level).size()) {
            throw ArgumentError("selection references a missing ball");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (selection[j] == ref) throw ArgumentError("selection lists a ball twice");
        }
        cands.push_back(make_candidate(stack, mass, ref, r));
    }
    std::vector<const Candidate*> chosen;
    for (const auto& c : cands) chosen.push_back(&c);
    return evaluate(chosen, mass);
}

std::optional<StackSelection> search_stack_selection(const Stack& stack, const DiscreteMassFunction& mass, Index t,
                                                     std::size_t max_balls) {
    for (std::size_t k = 1; k < stack.height(); ++k) {
        check_stack_inputs(stack, mass, k, t);
        const Index r = stack.level(k - 1).rmax();
        std::vector<BallRef> refs;
        for (std::size_t lv = k; lv < stack.height(); ++lv) {
            for (std::size_t i = 0; i < stack.level(lv).size(); ++i) refs.push_back({lv, i});
        }
        if (refs.size() > max_balls) throw SizeError("too many balls for an exhaustive stack search");
        std::vector<Candidate> cands;
        for (const auto& ref : refs) cands.push_back(make_candidate(stack, mass, ref, r));
        for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << refs.size()); ++mask) {
            std::vector<const Candidate*> chosen;
            StackSelection sel{k, {}};
            for (std::size_t i = 0; i < refs.size(); ++i) {
                if ((mask >> i) & 1U) {
                    chosen.push_back(&cands[i]);
                    sel.balls.push_back(refs[i]);
                }
            }
            if (evaluate(chosen, mass).ok()) return sel;
        }
    }
    return std::nullopt;
}

// -------------------------------------------------------- coarse dimension

bool boundary_chain_check(const MetricPtr& metric, const std::vector<ChainLink>& chain, const Rectangle& search_box,
                          Index max_points) {
    if (chain.empty()) throw ArgumentError("boundary chain must be non-empty");
    std::vector<Rectangle> balls;
    for (const auto& link : chain) {
        if (link.thickness < 0) throw ArgumentError("thickness must be non-negative");
        balls.emplace_back(metric, link.center, link.radius);
    }
    for (std::size_t i = 1; i < chain.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            if (!balls[j].in_thick_boundary(chain[j].thickness, chain[i].center)) {
                throw ArgumentError("chain center " + std::to_string(i) + " is outside the thick boundary of link " +
                                    std::to_string(j));
            }
        }
    }
    if (search_box.dimension() != metric->dimension()) throw ArgumentError("search box has wrong dimension");
    const Point lo = search_box.lower();
    const Point hi = search_box.upper();
    const auto& first = balls.front();
    for (std::size_t i = 0; i < lo.size(); ++i) {
        const Index reach = first.halfwidths()[i] + metric->profile(i).halfwidth(chain.front().thickness);
        if (first.center()[i] - reach < lo[i] || first.center()[i] + reach > hi[i]) {
            throw ArgumentError("search box must contain the first thick boundary");
        }
    }
    if (search_box.cardinality() > max_points) throw SizeError("search box too large to enumerate");

    Point z = lo;
    for (;;) {
        bool everywhere = true;
        for (std::size_t i = 0; i < balls.size() && everywhere; ++i) {
            everywhere = balls[i].in_thick_boundary(chain[i].thickness, z);
        }
        if (everywhere) return false;
        std::size_t axis = 0;
        while (axis < z.size() && z[axis] == hi[axis]) z[axis] = lo[axis], ++axis;
        if (axis == z.size()) return true;
        ++z[axis];
    }
}

Index coarse_scale(const RectangularMetric& metric) {
    double worst = 0.0;
    for (const auto& p : metric.profiles()) worst = std::max(worst, 1.0 / p.unit_value());
    const auto n = std::max<Index>(1, static_cast<Index>(std::ceil(worst)));
    return 5 * n + 1;
}

// --------------------------------------------------------- generation, io

Carpet random_carpet(const MetricPtr& metric, const CarpetShape& shape, std::uint64_t seed) {
    if (shape.points == 0) throw ArgumentError("carpet must contain at least one ball");
    if (shape.span < 0 || shape.max_radius < 0) throw ArgumentError("carpet shape needs non-negative span and radius");
    const std::size_t d = metric->dimension();
    const double room = std::pow(2.0 * static_cast<double>(shape.span) + 1.0, static_cast<double>(d));
    if (room < static_cast<double>(shape.points)) throw ArgumentError("not enough lattice points for the carpet");
    Engine rng(seed);
    std::set<Point> seen;
    std::vector<Point> points;
    std::vector<Index> radii;
    while (points.size() < shape.points) {
        Point z(d);
        for (auto& c : z) c = uniform_int(rng, -shape.span, shape.span);
        if (!seen.insert(z).second) continue;
        points.push_back(std::move(z));
        radii.push_back(uniform_int(rng, 0, shape.max_radius));
    }
    return Carpet(metric, std::move(points), std::move(radii));
}

void write_carpet(std::ostream& out, const Carpet& carpet) {
    for (std::size_t i = 0; i < carpet.size(); ++i) {
        out << carpet.dimension() << ' ' << carpet.radii()[i];
        for (Index c : carpet.points()[i]) out << ' ' << c;
        out << '\n';
    }
}

Carpet read_carpet(std::istream& in, const MetricPtr& metric) {
    std::vector<Point> points;
    std::vector<Index> radii;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream rec(line);
        std::size_t d = 0;
        Index r = 0;
        if (!(rec >> d >> r) || d != metric->dimension()) {
            throw ArgumentError("bad carpet record on line " + std::to_string(lineno));
        }
        Point z(d);
        for (auto& c : z) {
            if (!(rec >> c)) throw ArgumentError("bad carpet record on line " + std::to_string(lineno));
        }
        std::string extra;
        if (rec >> extra) throw ArgumentError("bad carpet record on line " + std::to_string(lineno));
        points.push_back(std::move(z));
        radii.push_back(r);
    }
    return Carpet(metric, std::move(points), std::move(radii));
}

}  // namespace rectdim
