#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "rectdim/logsum.hpp"
#include "rectdim/metric.hpp"
#include "rectdim/odometer.hpp"

namespace rectdim {

// ===================================================== one-dimensional sums

/// How a one-dimensional cocycle sum over an interval of powers is evaluated.
///
/// enumerate: walk T^j x term by term (O(length) per interval, O(1) amortized
///            per term, prefix sums reusable as the interval grows).
/// dyadic:    split the orbit segment into aligned blocks of 2^k consecutive
///            odometer values; the cocycle mass of such a block depends only on
///            the digits above k, so each block is one closed-form term
///            (O(N^2) per interval, independent of its length).
enum class SumKernel { enumerate, dyadic };

/// log sum_{j=lo}^{hi} phi(T^j x) omega_j(x), where phi is the indicator of
/// the cylinder `pattern` on the first digits (empty pattern: phi = 1).
double interval_log_sum(const OdometerSystem& system, const OdometerPoint& x, Index lo, Index hi,
                        SumKernel kernel, std::span<const std::uint8_t> pattern = {});

/// Prefix sums over j = 1..h in one direction, grown incrementally.
class DirectionalSum {
public:
    DirectionalSum(const OdometerSystem& system, const OdometerPoint& x, int direction,
                   std::span<const std::uint8_t> pattern = {});

    void extend_to(Index h);
    Index reach() const noexcept { return walker_.steps(); }
    const LogSumExp& total() const noexcept { return total_; }
    const LogSumExp& matched() const noexcept { return matched_; }

private:
    CocycleWalker walker_;
    std::vector<std::uint8_t> pattern_;
    LogSumExp total_;
    LogSumExp matched_;
};

/// Sums over the symmetric interval [-h, h], grown incrementally.
class SymmetricSum {
public:
    SymmetricSum(const OdometerSystem& system, const OdometerPoint& x, std::span<const std::uint8_t> pattern = {});

    void extend_to(Index h);
    Index reach() const noexcept { return forward_.reach(); }
    /// log sum_{|j| <= h} omega_j(x).
    double log_total() const;
    /// log sum_{|j| <= h} phi(T^j x) omega_j(x).
    double log_matched() const;

private:
    DirectionalSum forward_;
    DirectionalSum backward_;
    bool center_matches_;
};

// ================================================= rectangular cocycle sums

/// log sum_{u in B_n} omega_u(x), factorized over coordinates.
double rect_log_sum(const ProductSystem& system, const ProductPoint& x, const RectangularMetric& metric, Index n,
                    SumKernel kernel = SumKernel::enumerate);

/// sum_i log(2 h_i(n) + 1).
double log_cardinality(const RectangularMetric& metric, Index n);

struct SeriesPoint {
    Index n = 0;
    double log_card = 0.0;
    double log_sum = 0.0;
    double ratio = 0.0;
};

struct CocycleSumSeries {
    std::vector<SeriesPoint> points;
};

/// Series of rect_log_sum over ascending radii. With reuse and the enumerate
/// kernel the one-dimensional sums are extended in place, so the whole series
/// costs O(sum_i h_i(n_max)).
CocycleSumSeries series(const ProductSystem& system, const ProductPoint& x, const RectangularMetric& metric,
                        std::span<const Index> radii, bool reuse = true,
                        SumKernel kernel = SumKernel::enumerate);

/// 1 = n0 < ... <= n_max stepping by `growth` (rounded up, at least +1).
std::vector<Index> radius_grid(Index n_min, Index n_max, double growth = 1.25);

// ===================================================== critical dimensions

struct EstimatorOptions {
    std::vector<Index> radii;
    double tail_fraction = 0.5;
    std::size_t samples = 20;
    std::uint64_t seed = 1;
    SumKernel kernel = SumKernel::enumerate;
    bool reuse = true;
    unsigned workers = 1;
};

struct SampleEstimate {
    std::uint64_t seed = 0;
    double alpha_hat = 0.0;
    double beta_hat = 0.0;
    CocycleSumSeries series;

    double gamma_hat() const noexcept { return 0.5 * (alpha_hat + beta_hat); }
};

struct CriticalDimensionEstimate {
    double alpha_hat = 0.0;  // median over samples
    double beta_hat = 0.0;   // median over samples
    double gamma_hat = 0.0;  // median of per-sample midpoints
    Index tail_start = 0;
    std::size_t discards = 0;
    std::vector<SampleEstimate> samples;
};

/// First radius of the tail window: ceil(tail_fraction * n_max).
Index tail_start(double tail_fraction, Index n_max);

/// min / max of the ratio over the tail window of one series.
std::pair<double, double> tail_extremes(const CocycleSumSeries& s, Index tail_start);

CriticalDimensionEstimate critical_dimensions(const ProductSystem& system, const RectangularMetric& metric,
                                              const EstimatorOptions& options);

enum class Membership { lower, upper, indeterminate };

/// lower: the ratio stays above t on the tail (sample looks like a point of
/// L_t); upper: it stays below t (U_t); anything else is indeterminate.
Membership classify(const SampleEstimate& sample, Index tail_start, double t);

double median(std::vector<double> values);

// ======================================================= entropy oracle

/// -(1/n) sum_{i<n} log2 mu_i(x_i).
double entropy_oracle(const OdometerSystem& system, const OdometerPoint& x, std::size_t n);

/// Weighted-average prediction sum c_i gamma_i / sum c_i over the dominant
/// growth class, with gamma_i the mean digit entropy of component i.
/// nullopt when a profile has no known growth class.
std::optional<double> predicted_dimension(const ProductSystem& system, const RectangularMetric& metric);

/// Bounds (sum_D a_i alpha_i / sum_D b_i, sum_D b_i beta_i / sum_D a_i).
std::pair<double, double> prodcd_bounds(std::span<const double> a, std::span<const double> b,
                                        std::span<const double> alpha, std::span<const double> beta,
                                        std::span<const std::size_t> dominant);

// ============================================= ergodic and Folner averages

/// R_n phi(x) = sum_{B_n} phi(u.x) omega_u(x) / sum_{B_n} omega_u(x), as a
/// product of one-dimensional ratio averages.
double ratio_average(const ProductSystem& system, const ProductPoint& x, const RectangularMetric& metric, Index n,
                     const CylinderFunction& phi, SumKernel kernel = SumKernel::enumerate);

/// R_n phi(x) along ascending radii, sharing prefix sums.
std::vector<double> ratio_average_series(const ProductSystem& system, const ProductPoint& x,
                                         const RectangularMetric& metric, std::span<const Index> radii,
                                         const CylinderFunction& phi, SumKernel kernel = SumKernel::enumerate);

/// sum over the t-boundary of B_n of omega_u, divided by the sum over B_n.
/// The numerator is the outer box minus the strict interior, both factorized.
double folner_ratio(const ProductSystem& system, const ProductPoint& x, const RectangularMetric& metric, Index n,
                    Index t, SumKernel kernel = SumKernel::enumerate);

// ================================================= maximal inequality

struct MaximalReport {
    double epsilon = 0.0;
    std::size_t samples = 0;
    std::size_t exceed = 0;
    double fraction = 0.0;
    double bound = 0.0;  // 4^d ||phi||_1 / epsilon
    std::size_t discards = 0;
    bool pass = false;   // fraction <= bound
};

/// Fraction of sampled points with max_{1 <= n <= n_max} |R_n phi| > epsilon,
/// every integer n visited, for each epsilon in the grid.
std::vector<MaximalReport> maximal_tail_check(const ProductSystem& system, const RectangularMetric& metric,
                                              const CylinderFunction& phi, std::span<const double> epsilons,
                                              Index n_max, std::size_t samples, std::uint64_t seed,
                                              unsigned workers = 1);

// ==================================================== growth comparison

struct GrowthRow {
    Index n = 0;
    Index m = 0;        // max k >= 0 with A'_k inside A_n (A'_0 empty)
    Index m_prime = 0;  // max k >= 0 with A_k inside A'_n
    double ratio = 0.0;        // |A'_{m(n)}| / |A_n|
    double ratio_prime = 0.0;  // |A_{m'(n)}| / |A'_n|
};

struct GrowthComparisonReport {
    std::vector<GrowthRow> rows;
    double threshold = 0.0;
    Index burn_in = 0;  // first n the verdict looks at
    bool comparable = false;
};

GrowthComparisonReport compare_growth(const RectangularMetric& a, const RectangularMetric& b, Index first,
                                      Index last, double threshold, double burn_in_fraction = 0.25);

/// Largest k >= 0 with ball_k(inner) contained in ball_n(outer), ball_0 empty.
Index interleave_index(const RectangularMetric& inner, const RectangularMetric& outer, Index n);

// ===================================================== stansym sandwich

struct StansymSample {
    std::uint64_t seed = 0;
    double alpha_plus = 0.0, beta_plus = 0.0;    // T over [1, n]
    double alpha_minus = 0.0, beta_minus = 0.0;  // T^-1 over [1, n]
    double alpha = 0.0, beta = 0.0;              // T over [-n, n]
};

struct StansymReport {
    std::vector<StansymSample> samples;
    StansymSample median;  // componentwise medians
    std::size_t discards = 0;
    double tolerance = 0.0;
    bool sandwich = false;   // max(a+, a-) <= a + tol, a <= b, b <= max(b+, b-) + tol
    bool tight = false;      // |a - max(a+, a-)| <= tol
    bool symmetric = false;  // |a+ - a-| <= tol
    bool pass() const noexcept { return sandwich && tight && symmetric; }
};

/// One-dimensional sandwich check over half-widths h(n) of `metric`.
StansymReport stansym_check(const OdometerSystem& system, const RectangularMetric& metric,
                            std::span<const Index> radii, double tail_fraction, std::size_t samples,
                            std::uint64_t seed, double tolerance, SumKernel kernel = SumKernel::enumerate,
                            unsigned workers = 1);

}  // namespace rectdim
