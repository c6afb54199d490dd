#include "rectdim/estimator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "rectdim/sampling.hpp"

namespace rectdim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_same_dimension(const ProductSystem& system, const RectangularMetric& metric) {
    if (system.dimension() != metric.dimension()) {
        throw ArgumentError("system and metric have different dimensions");
    }
}

void require_point(const ProductSystem& system, const ProductPoint& x) {
    if (x.size() != system.dimension()) throw ArgumentError("point has wrong number of components");
    for (std::size_t i = 0; i < x.size(); ++i) system.component(i).check_point(x[i]);
}

std::uint64_t magnitude(Index j) {
    return j < 0 ? ~static_cast<std::uint64_t>(j) + 1 : static_cast<std::uint64_t>(j);
}

// Shifts digits by a signed offset in the base orientation.
bool shift(std::vector<std::uint8_t>& bits, Index offset) {
    return offset >= 0 ? add_magnitude(bits, magnitude(offset)) : sub_magnitude(bits, magnitude(offset));
}

// Sum over base-orientation offsets [a, b] by aligned dyadic blocks.
//
// A block of 2^k consecutive values starting at a multiple of 2^k fixes every
// digit at position >= k and runs over all patterns below. Its cocycle mass
// relative to x is
//     prod_{i>=k} mu_i(y_i) / prod_i mu_i(x_i),
// since the free digits sum to one. With a cylinder on the first K digits the
// free digits below min(k, K) are pinned, contributing prod mu_i(pattern_i),
// and digits in [k, K) must already agree with the pattern.
double dyadic_sum(const OdometerSystem& system, const OdometerPoint& x, Index a, Index b,
                  std::span<const std::uint8_t> pattern) {
    const std::size_t depth = system.depth();
    std::vector<std::uint8_t> cur = x.bits;
    if (!shift(cur, a)) throw HorizonOverflow("interval start crosses the truncation horizon");
    {
        std::vector<std::uint8_t> end = x.bits;
        if (!shift(end, b)) throw HorizonOverflow("interval end crosses the truncation horizon");
    }
    const std::uint64_t count = static_cast<std::uint64_t>(b) - static_cast<std::uint64_t>(a) + 1;
    if (pattern.empty() && system.measure_preserving()) return std::log(static_cast<double>(count));

    // prefix_x[k] = sum_{i<k} log mu_i(x_i); prefix_pat[k] likewise for the pattern.
    std::vector<double> prefix_x(depth + 1, 0.0);
    for (std::size_t i = 0; i < depth; ++i) prefix_x[i + 1] = prefix_x[i] + system.log_mass(i, x.bits[i]);
    std::vector<double> prefix_pat(pattern.size() + 1, 0.0);
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        prefix_pat[i + 1] = prefix_pat[i] + system.log_mass(i, pattern[i]);
    }

    LogSumExp acc;
    std::uint64_t remaining = count;
    while (remaining > 0) {
        std::size_t tz = 0;
        while (tz < depth && cur[tz] == 0) ++tz;
        const auto cap = static_cast<std::size_t>(std::bit_width(remaining) - 1);
        const std::size_t k = std::min(tz, cap);

        bool keep = true;
        for (std::size_t i = k; i < pattern.size(); ++i) {
            if (cur[i] != pattern[i]) {
                keep = false;
                break;
            }
        }
        if (keep) {
            double w = -prefix_x[k];
            for (std::size_t i = k; i < depth; ++i) {
                if (cur[i] != x.bits[i]) w += system.log_mass(i, cur[i]) - system.log_mass(i, x.bits[i]);
            }
            w += prefix_pat[std::min(k, pattern.size())];
            acc.add(w);
        }

        remaining -= std::uint64_t{1} << k;
        if (remaining > 0) {
            std::size_t i = k;
            while (i < depth && cur[i] == 1) cur[i++] = 0;
            if (i == depth) throw HorizonOverflow("carry crossed the truncation horizon");
            cur[i] = 1;
        }
    }
    return acc.value();
}

double enumerate_sum(const OdometerSystem& system, const OdometerPoint& x, Index lo, Index hi,
                     std::span<const std::uint8_t> pattern) {
    LogSumExp acc;
    const auto take = [&](double w, const std::vector<std::uint8_t>& bits) {
        if (matches_prefix(bits, pattern)) acc.add(w);
    };
    if (lo <= 0 && 0 <= hi) take(0.0, x.bits);
    if (hi > 0) {
        CocycleWalker fwd(system, x, +1);
        while (fwd.steps() < hi) {
            const double w = fwd.step();
            if (fwd.steps() >= lo) take(w, fwd.bits());
        }
    }
    if (lo < 0) {
        CocycleWalker bwd(system, x, -1);
        while (bwd.steps() < -lo) {
            const double w = bwd.step();
            if (-bwd.steps() <= hi) take(w, bwd.bits());
        }
    }
    return acc.value();
}

Index checked_halfwidth_sum(Index h, Index tau) { return checked_add(h, tau); }

}  // namespace

double interval_log_sum(const OdometerSystem& system, const OdometerPoint& x, Index lo, Index hi,
                        SumKernel kernel, std::span<const std::uint8_t> pattern) {
    system.check_point(x);
    if (pattern.size() > system.depth()) throw ArgumentError("pattern longer than the odometer depth");
    if (lo > hi) return kNegInf;
    if (kernel == SumKernel::enumerate) return enumerate_sum(system, x, lo, hi, pattern);
    // Powers of a reversed system are the base powers negated.
    return system.reversed() ? dyadic_sum(system, x, -hi, -lo, pattern) : dyadic_sum(system, x, lo, hi, pattern);
}

// ------------------------------------------------------- DirectionalSum

DirectionalSum::DirectionalSum(const OdometerSystem& system, const OdometerPoint& x, int direction,
                               std::span<const std::uint8_t> pattern)
    : walker_(system, x, direction), pattern_(pattern.begin(), pattern.end()) {
    if (pattern_.size() > system.depth()) throw ArgumentError("pattern longer than the odometer depth");
}

void DirectionalSum::extend_to(Index h) {
    while (walker_.steps() < h) {
        const double w = walker_.step();
        total_.add(w);
        if (!pattern_.empty() && matches_prefix(walker_.bits(), pattern_)) matched_.add(w);
    }
}

// --------------------------------------------------------- SymmetricSum

SymmetricSum::SymmetricSum(const OdometerSystem& system, const OdometerPoint& x, std::span<const std::uint8_t> pattern)
    : forward_(system, x, +1, pattern),
      backward_(system, x, -1, pattern),
      center_matches_(matches_prefix(x.bits, pattern)) {}

void SymmetricSum::extend_to(Index h) {
    forward_.extend_to(h);
    backward_.extend_to(h);
}

double SymmetricSum::log_total() const {
    LogSumExp acc;
    acc.add(0.0);
    acc.merge(forward_.total());
    acc.merge(backward_.total());
    return acc.value();
}

double SymmetricSum::log_matched() const {
    LogSumExp acc;
    if (center_matches_) acc.add(0.0);
    acc.merge(forward_.matched());
    acc.merge(backward_.matched());
    return acc.value();
}

// ------------------------------------------------- rectangular sums

double log_cardinality(const RectangularMetric& metric, Index n) {
    double acc = 0.0;
    for (Index h : metric.halfwidths(n)) acc += std::log(2.0 * static_cast<double>(h) + 1.0);
    return acc;
}

double rect_log_sum(const ProductSystem& system, const ProductPoint& x, const RectangularMetric& metric, Index n,
                    SumKernel kernel) {
    require_same_dimension(system, metric);
    require_point(system, x);
    const auto h = metric.halfwidths(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (kernel == SumKernel::enumerate) {
            SymmetricSum s(system.component(i), x[i]);
            s.extend_to(h[i]);
            acc += s.log_total();
        } else {
            acc += interval_log_sum(system.component(i), x[i], -h[i], h[i], SumKernel::dyadic);
        }
    }
    return acc;
}

CocycleSumSeries series(const ProductSystem& system, const ProductPoint& x, const RectangularMetric& metric,
                        std::span<const Index> radii, bool reuse, SumKernel kernel) {
    require_same_dimension(system, metric);
    require_point(system, x);
    if (radii.empty()) throw ArgumentError("radius range must be non-empty");
    CocycleSumSeries out;
    out.points.reserve(radii.size());

    std::vector<SymmetricSum> sums;
    if (reuse && kernel == SumKernel::enumerate) {
        sums.reserve(system.dimension());
        for (std::size_t i = 0; i < system.dimension(); ++i) sums.emplace_back(system.component(i), x[i]);
    }

    Index previous = 0;
    for (Index n : radii) {
        if (n < 1) throw ArgumentError("series radii must be positive");
        if (n <= previous) throw ArgumentError("series radii must be strictly increasing");
        previous = n;
        SeriesPoint p;
        p.n = n;
        p.log_card = log_cardinality(metric, n);
        if (!sums.empty()) {
            const auto h = metric.halfwidths(n);
            for (std::size_t i = 0; i < h.size(); ++i) {
                sums[i].extend_to(h[i]);
                p.log_sum += sums[i].log_total();
            }
        } else {
            p.log_sum = rect_log_sum(system, x, metric, n, kernel);
        }
        p.ratio = p.log_sum / p.log_card;
        out.points.push_back(p);
    }
    return out;
}

std::vector<Index> radius_grid(Index n_min, Index n_max, double growth) {
    if (n_min < 1 || n_max < n_min) throw ArgumentError("radius range must satisfy 1 <= n_min <= n_max");
    if (!(growth >= 1.0)) throw ArgumentError("radius growth factor must be >= 1");
    std::vector<Index> out;
    Index n = n_min;
    while (n < n_max) {
        out.push_back(n);
        const auto next = static_cast<Index>(std::ceil(static_cast<double>(n) * growth));
        n = std::max(n + 1, next);
    }
    out.push_back(n_max);
    return out;
}

// ---------------------------------------------- critical dimensions

double median(std::vector<double> values) {
    if (values.empty()) throw ArgumentError("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

Index tail_start(double tail_fraction, Index n_max) {
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw ArgumentError("tail fraction must lie in (0, 1]");
    return std::max<Index>(1, static_cast<Index>(std::ceil(tail_fraction * static_cast<double>(n_max))));
}

std::pair<double, double> tail_extremes(const CocycleSumSeries& s, Index start) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& p : s.points) {
        if (p.n < start) continue;
        lo = std::min(lo, p.ratio);
        hi = std::max(hi, p.ratio);
    }
    if (lo > hi) throw ArgumentError("tail window contains no radii");
    return {lo, hi};
}

CriticalDimensionEstimate critical_dimensions(const ProductSystem& system, const RectangularMetric& metric,
                                              const EstimatorOptions& options) {
    require_same_dimension(system, metric);
    if (options.radii.empty()) throw ArgumentError("radius range must be non-empty");
    if (options.samples < 1) throw ArgumentError("need at least one sample");
    const Index start = tail_start(options.tail_fraction, options.radii.back());

    auto batch = run_samples<SampleEstimate>(options.samples, options.seed, options.workers, [&](std::uint64_t seed) {
        SampleEstimate est;
        est.seed = seed;
        est.series = series(system, system.sample(seed), metric, options.radii, options.reuse, options.kernel);
        std::tie(est.alpha_hat, est.beta_hat) = tail_extremes(est.series, start);
        return est;
    });

    CriticalDimensionEstimate out;
    out.tail_start = start;
    out.discards = batch.discards;
    std::vector<double> alphas, betas, gammas;
    for (const auto& s : batch.results) {
        alphas.push_back(s.alpha_hat);
        betas.push_back(s.beta_hat);
        gammas.push_back(s.gamma_hat());
    }
    out.alpha_hat = median(alphas);
    out.beta_hat = median(betas);
    out.gamma_hat = median(gammas);
    out.samples = std::move(batch.results);
    return out;
}

Membership classify(const SampleEstimate& sample, Index start, double t) {
    const auto [lo, hi] = tail_extremes(sample.series, start);
    if (lo > t) return Membership::lower;
    if (hi < t) return Membership::upper;
    return Membership::indeterminate;
}

// ----------------------------------------------------- entropy / predictions

double entropy_oracle(const OdometerSystem& system, const OdometerPoint& x, std::size_t n) {
    return system.entropy_average(x, n);
}

std::pair<double, double> prodcd_bounds(std::span<const double> a, std::span<const double> b,
                                        std::span<const double> alpha, std::span<const double> beta,
                                        std::span<const std::size_t> dominant) {
    if (dominant.empty()) throw ArgumentError("dominant index set must be non-empty");
    const std::size_t d = a.size();
    if (b.size() != d || alpha.size() != d || beta.size() != d) throw ArgumentError("bound inputs differ in length");
    double num_lo = 0.0, num_hi = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (std::size_t i : dominant) {
        if (i >= d) throw ArgumentError("dominant index out of range");
        if (a[i] > b[i]) throw ArgumentError("growth bounds need a_i <= b_i");
        num_lo += a[i] * alpha[i];
        num_hi += b[i] * beta[i];
        sum_a += a[i];
        sum_b += b[i];
    }
    if (!(sum_a > 0.0) || !(sum_b > 0.0)) throw ArgumentError("growth weights must have positive sums");
    return {num_lo / sum_b, num_hi / sum_a};
}

std::optional<double> predicted_dimension(const ProductSystem& system, const RectangularMetric& metric) {
    require_same_dimension(system, metric);
    std::vector<GrowthRate> rates;
    bool any_exponential = false;
    for (const auto& p : metric.profiles()) {
        const auto g = p.growth();
        if (!g) return std::nullopt;
        rates.push_back(*g);
        any_exponential = any_exponential || g->exponential;
    }
    const std::size_t d = rates.size();
    std::vector<double> c(d), gamma(d);
    std::vector<std::size_t> dominant;
    for (std::size_t i = 0; i < d; ++i) {
        c[i] = rates[i].exponent;
        gamma[i] = system.component(i).mean_entropy();
        if (rates[i].exponential == any_exponential) dominant.push_back(i);
    }
    return prodcd_bounds(c, c, gamma, gamma, dominant).first;
}

// --------------------------------------------------- ergodic / Folner

double ratio_average(const ProductSystem& system, const ProductPoint& x, const RectangularMetric& metric, Index n,
                     const CylinderFunction& phi, SumKernel kernel) {
    const Index radii[] = {n};
    return ratio_average_series(system, x, metric, radii, phi, kernel).front();
}

std::vector<double> ratio_average_series(const ProductSystem& system, const ProductPoint& x,
                                         const RectangularMetric& metric, std::span<const Index> radii,
                                         const CylinderFunction& phi, SumKernel kernel) {
    require_same_dimension(system, metric);
    require_point(system, x);
    if (phi.patterns().size() != system.dimension()) throw ArgumentError("cylinder has wrong dimension");

    std::vector<std::size_t> active;
    std::vector<SymmetricSum> sums;
    for (std::size_t i = 0; i < system.dimension(); ++i) {
        if (phi.pattern(i).empty()) continue;
        active.push_back(i);
        if (kernel == SumKernel::enumerate) sums.emplace_back(system.component(i), x[i], phi.pattern(i));
    }

    std::vector<double> out;
    out.reserve(radii.size());
    for (Index n : radii) {
        const auto h = metric.halfwidths(n);
        double log_ratio = 0.0;
        for (std::size_t k = 0; k < active.size(); ++k) {
            const std::size_t i = active[k];
            if (kernel == SumKernel::enumerate) {
                sums[k].extend_to(h[i]);
                log_ratio += sums[k].log_matched() - sums[k].log_total();
            } else {
                const auto& c = system.component(i);
                log_ratio += interval_log_sum(c, x[i], -h[i], h[i], kernel, phi.pattern(i)) -
                             interval_log_sum(c, x[i], -h[i], h[i], kernel);
            }
        }
        out.push_back(active.empty() ? 1.0 : std::exp(log_ratio));
    }
    return out;
}

double folner_ratio(const ProductSystem& system, const ProductPoint& x, const RectangularMetric& metric, Index n,
                    Index t, SumKernel kernel) {
    require_same_dimension(system, metric);
    require_point(system, x);
    if (t < 0) throw ArgumentError("thickness must be non-negative");
    const auto h = metric.halfwidths(n);
    const std::size_t d = h.size();

    if (system.measure_preserving()) {
        // Every omega is 1: the ratio is a lattice-point count.
        Index outer = 1, inner = 1, card = 1;
        for (std::size_t i = 0; i < d; ++i) {
            const Index tau = metric.profile(i).halfwidth(t);
            outer = checked_mul(outer, 2 * checked_halfwidth_sum(h[i], tau) + 1);
            inner = checked_mul(inner, std::max<Index>(0, 2 * (h[i] - tau) - 1));
            card = checked_mul(card, 2 * h[i] + 1);
        }
        return static_cast<double>(outer - inner) / static_cast<double>(card);
    }

    double log_outer = 0.0, log_mid = 0.0, log_inner = 0.0;
    bool inner_empty = false;
    for (std::size_t i = 0; i < d; ++i) {
        const auto& c = system.component(i);
        const Index tau = metric.profile(i).halfwidth(t);
        const Index in = h[i] - tau - 1;
        const Index out = checked_halfwidth_sum(h[i], tau);
        if (in < 0) inner_empty = true;
        if (kernel == SumKernel::enumerate) {
            SymmetricSum s(c, x[i]);
            if (in >= 0) {
                s.extend_to(in);
                log_inner += s.log_total();
            }
            s.extend_to(h[i]);
            log_mid += s.log_total();
            s.extend_to(out);
            log_outer += s.log_total();
        } else {
            if (in >= 0) log_inner += interval_log_sum(c, x[i], -in, in, kernel);
            log_mid += interval_log_sum(c, x[i], -h[i], h[i], kernel);
            log_outer += interval_log_sum(c, x[i], -out, out, kernel);
        }
    }
    const double r = std::exp(log_outer - log_mid) - (inner_empty ? 0.0 : std::exp(log_inner - log_mid));
    return std::max(0.0, r);
}

// -------------------------------------------------- maximal inequality

std::vector<MaximalReport> maximal_tail_check(const ProductSystem& system, const RectangularMetric& metric,
                                              const CylinderFunction& phi, std::span<const double> epsilons,
                                              Index n_max, std::size_t samples, std::uint64_t seed,
                                              unsigned workers) {
    require_same_dimension(system, metric);
    if (n_max < 1) throw ArgumentError("n_max must be positive");
    if (samples < 1) throw ArgumentError("need at least one sample");
    for (double e : epsilons) {
        if (!(e > 0.0)) throw ArgumentError("epsilon must be positive");
    }

    auto batch = run_samples<double>(samples, seed, workers, [&](std::uint64_t s) {
        const ProductPoint x = system.sample(s);
        std::vector<std::size_t> active;
        std::vector<SymmetricSum> sums;
        for (std::size_t i = 0; i < system.dimension(); ++i) {
            if (phi.pattern(i).empty()) continue;
            active.push_back(i);
            sums.emplace_back(system.component(i), x[i], phi.pattern(i));
        }
        if (active.empty()) return 1.0;
        double sup = 0.0;
        for (Index n = 1; n <= n_max; ++n) {
            const auto h = metric.halfwidths(n);
            double log_ratio = 0.0;
            for (std::size_t k = 0; k < active.size(); ++k) {
                sums[k].extend_to(h[active[k]]);
                log_ratio += sums[k].log_matched() - sums[k].log_total();
            }
            sup = std::max(sup, std::exp(log_ratio));
        }
        return sup;
    });

    const double scale = std::pow(4.0, static_cast<double>(system.dimension())) * phi.integral();
    std::vector<MaximalReport> out;
    for (double e : epsilons) {
        MaximalReport r;
        r.epsilon = e;
        r.samples = samples;
        r.discards = batch.discards;
        r.exceed = static_cast<std::size_t>(
            std::count_if(batch.results.begin(), batch.results.end(), [e](double sup) { return sup > e; }));
        r.fraction = static_cast<double>(r.exceed) / static_cast<double>(samples);
        r.bound = scale / e;
        r.pass = r.fraction <= r.bound;
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------- growth comparison

namespace {

bool ball_inside(const RectangularMetric& inner, Index k, const std::vector<Index>& outer_h) {
    try {
        const auto h = inner.halfwidths(k);
        for (std::size_t i = 0; i < h.size(); ++i) {
            if (h[i] > outer_h[i]) return false;
        }
        return true;
    } catch (const RangeError&) {
        return false;  // larger than anything representable
    }
}

}  // namespace

Index interleave_index(const RectangularMetric& inner, const RectangularMetric& outer, Index n) {
    if (inner.dimension() != outer.dimension()) throw ArgumentError("sequences live in different dimensions");
    const auto outer_h = outer.halfwidths(n);
    if (!ball_inside(inner, 1, outer_h)) return 0;
    Index lo = 1, hi = 2;
    while (ball_inside(inner, hi, outer_h)) {
        lo = hi;
        if (hi > (Index{1} << 40)) throw RangeError("interleaving index did not terminate");
        hi *= 2;
    }
    while (hi - lo > 1) {
        const Index mid = lo + (hi - lo) / 2;
        (ball_inside(inner, mid, outer_h) ? lo : hi) = mid;
    }
    return lo;
}

GrowthComparisonReport compare_growth(const RectangularMetric& a, const RectangularMetric& b, Index first,
                                      Index last, double threshold, double burn_in_fraction) {
    if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("comparability constant must lie in (0, 1)");
    if (first < 1 || last < first) throw ArgumentError("range must satisfy 1 <= first <= last");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) throw ArgumentError("burn-in fraction must lie in [0, 1)");
    GrowthComparisonReport rep;
    rep.threshold = threshold;
    rep.burn_in = first + static_cast<Index>(std::ceil(burn_in_fraction * static_cast<double>(last - first)));
    rep.comparable = true;
    const auto ratio = [](const RectangularMetric& num, Index k, const RectangularMetric& den, Index n) {
        return k == 0 ? 0.0 : std::exp(log_cardinality(num, k) - log_cardinality(den, n));
    };
    for (Index n = first; n <= last; ++n) {
        GrowthRow row;
        row.n = n;
        row.m = interleave_index(b, a, n);
        row.m_prime = interleave_index(a, b, n);
        row.ratio = ratio(b, row.m, a, n);
        row.ratio_prime = ratio(a, row.m_prime, b, n);
        if (n >= rep.burn_in) {
            const auto inside = [threshold](double r) { return r >= threshold && r <= 1.0 / threshold; };
            if (!inside(row.ratio) || !inside(row.ratio_prime)) rep.comparable = false;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

// ------------------------------------------------------ stansym sandwich

StansymReport stansym_check(const OdometerSystem& system, const RectangularMetric& metric,
                            std::span<const Index> radii, double tail_fraction, std::size_t samples,
                            std::uint64_t seed, double tolerance, SumKernel kernel, unsigned workers) {
    if (metric.dimension() != 1) throw ArgumentError("the sandwich check is one-dimensional");
    if (radii.empty()) throw ArgumentError("radius range must be non-empty");
    const Index start = tail_start(tail_fraction, radii.back());
    const OdometerSystem inverse = invert(system);

    auto batch = run_samples<StansymSample>(samples, seed, workers, [&](std::uint64_t s) {
        const OdometerPoint x = system.sample(s);
        CocycleSumSeries plus, minus, sym;
        DirectionalSum fwd(system, x, +1);
        DirectionalSum inv(inverse, x, +1);
        SymmetricSum both(system, x);
        for (Index n : radii) {
            const Index h = metric.profile(0).halfwidth(n);
            if (h < 2) continue;  // log |[1, h]| must be positive
            const double log_h = std::log(static_cast<double>(h));
            const double log_2h = std::log(2.0 * static_cast<double>(h) + 1.0);
            double lp, lm, ls;
            if (kernel == SumKernel::enumerate) {
                fwd.extend_to(h);
                inv.extend_to(h);
                both.extend_to(h);
                lp = fwd.total().value();
                lm = inv.total().value();
                ls = both.log_total();
            } else {
                lp = interval_log_sum(system, x, 1, h, kernel);
                lm = interval_log_sum(inverse, x, 1, h, kernel);
                ls = interval_log_sum(system, x, -h, h, kernel);
            }
            plus.points.push_back({n, log_h, lp, lp / log_h});
            minus.points.push_back({n, log_h, lm, lm / log_h});
            sym.points.push_back({n, log_2h, ls, ls / log_2h});
        }
        StansymSample out;
        out.seed = s;
        std::tie(out.alpha_plus, out.beta_plus) = tail_extremes(plus, start);
        std::tie(out.alpha_minus, out.beta_minus) = tail_extremes(minus, start);
        std::tie(out.alpha, out.beta) = tail_extremes(sym, start);
        return out;
    });

    StansymReport rep;
    rep.tolerance = tolerance;
    rep.discards = batch.discards;
    const auto med = [&](auto field) {
        std::vector<double> v;
        for (const auto& s : batch.results) v.push_back(s.*field);
        return median(std::move(v));
    };
    rep.median.alpha_plus = med(&StansymSample::alpha_plus);
    rep.median.beta_plus = med(&StansymSample::beta_plus);
    rep.median.alpha_minus = med(&StansymSample::alpha_minus);
    rep.median.beta_minus = med(&StansymSample::beta_minus);
    rep.median.alpha = med(&StansymSample::alpha);
    rep.median.beta = med(&StansymSample::beta);
    rep.samples = std::move(batch.results);

    const auto& m = rep.median;
    const double lower = std::max(m.alpha_plus, m.alpha_minus);
    const double upper = std::max(m.beta_plus, m.beta_minus);
    rep.sandwich = lower <= m.alpha + tolerance && m.alpha <= m.beta && m.beta <= upper + tolerance;
    rep.tight = std::abs(m.alpha - lower) <= tolerance;
    rep.symmetric = std::abs(m.alpha_plus - m.alpha_minus) <= tolerance;
    return rep;
}

}  // namespace rectdim
