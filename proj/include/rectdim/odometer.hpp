#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rectdim/errors.hpp"

namespace rectdim {

/// A point of the truncated space {0,1}^N; bits[0] is the least significant
/// digit, the one the odometer increments.
struct OdometerPoint {
    std::vector<std::uint8_t> bits;

    std::size_t depth() const noexcept { return bits.size(); }
    bool operator==(const OdometerPoint&) const = default;
};

/// Binary odometer x -> x + 1 (with carry) on (prod Z_2, (x) mu_i), where
/// mu_i(0) = p_i. Truncated at depth N: a carry or borrow that would leave the
/// first N digits raises HorizonOverflow instead of touching the tail.
///
/// A reversed system is the inverse transformation on the same space: its
/// T^j is the forward system's T^{-j}.
class OdometerSystem {
public:
    explicit OdometerSystem(std::vector<double> zero_probabilities, bool reversed = false);
    static OdometerSystem constant(std::size_t depth, double p);

    std::size_t depth() const noexcept { return p_.size(); }
    double zero_probability(std::size_t i) const { return p_.at(i); }
    const std::vector<double>& zero_probabilities() const noexcept { return p_; }
    bool reversed() const noexcept { return reversed_; }
    bool measure_preserving() const noexcept { return measure_preserving_; }

    /// log mu_i(bit).
    double log_mass(std::size_t i, std::uint8_t bit) const { return bit ? log_one_[i] : log_zero_[i]; }
    /// log mu_i(1) - log mu_i(0): the log-weight gained when digit i goes 0 -> 1.
    double flip_gain(std::size_t i) const { return log_one_[i] - log_zero_[i]; }

    /// The inverse transformation as a system on the same measure space.
    OdometerSystem inverse() const;

    OdometerPoint sample(std::uint64_t seed) const;
    OdometerPoint apply_power(const OdometerPoint& x, std::int64_t j) const;

    /// log (d mu o T^j / d mu)(x).
    double log_cocycle(const OdometerPoint& x, std::int64_t j) const;

    /// -(1/n) sum_{i<n} log2 mu_i(x_i).
    double entropy_average(const OdometerPoint& x, std::size_t n) const;

    /// (1/N) sum_i H(mu_i).
    double mean_entropy() const;

    void check_point(const OdometerPoint& x) const;

private:
    std::vector<double> p_;
    std::vector<double> log_zero_;
    std::vector<double> log_one_;
    bool reversed_;
    bool measure_preserving_;
};

OdometerSystem invert(const OdometerSystem& system);

/// Shannon entropy in bits of the measure (p, 1 - p) on {0, 1}.
double binary_entropy(double p);

/// Digit-vector arithmetic in the base (unreversed) orientation. Both return
/// false, leaving `bits` unspecified, if the result leaves [0, 2^N).
bool add_magnitude(std::vector<std::uint8_t>& bits, std::uint64_t m);
bool sub_magnitude(std::vector<std::uint8_t>& bits, std::uint64_t m);

/// Steps through T^1 x, T^2 x, ... (or T^-1 x, T^-2 x, ... for a negative
/// direction) tracking the cumulative log cocycle. Each step costs O(1)
/// amortized digit flips.
class CocycleWalker {
public:
    CocycleWalker(const OdometerSystem& system, const OdometerPoint& x, int direction);

    /// Advances one step and returns log omega_{steps()}(x) in the walker's direction.
    double step();

    std::int64_t steps() const noexcept { return steps_; }
    double log_weight() const noexcept { return log_weight_; }
    const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

private:
    const OdometerSystem* system_;
    std::vector<std::uint8_t> bits_;
    std::uint8_t carry_digit_;  // digit that turns over when the walker carries
    double log_weight_ = 0.0;
    std::int64_t steps_ = 0;
};

// ------------------------------------------------------------ products

using ProductPoint = std::vector<OdometerPoint>;

/// (u_1..u_d) . (x_1..x_d) = (T_1^{u_1} x_1, ..., T_d^{u_d} x_d).
class ProductSystem {
public:
    explicit ProductSystem(std::vector<OdometerSystem> components);

    std::size_t dimension() const noexcept { return components_.size(); }
    const OdometerSystem& component(std::size_t i) const { return components_.at(i); }
    const std::vector<OdometerSystem>& components() const noexcept { return components_; }
    bool measure_preserving() const noexcept;

    ProductPoint sample(std::uint64_t seed) const;
    ProductPoint apply(const ProductPoint& x, std::span<const std::int64_t> u) const;
    double log_cocycle(const ProductPoint& x, std::span<const std::int64_t> u) const;

private:
    std::vector<OdometerSystem> components_;
};

/// Indicator of a product cylinder: component i must match `patterns[i]` on
/// its first digits. The exact integral under the product measure is attached.
class CylinderFunction {
public:
    CylinderFunction(const ProductSystem& system, std::vector<std::string> patterns);

    double integral() const noexcept { return integral_; }
    const std::vector<std::vector<std::uint8_t>>& patterns() const noexcept { return patterns_; }
    std::span<const std::uint8_t> pattern(std::size_t i) const { return patterns_.at(i); }
    const std::vector<std::string>& spelling() const noexcept { return spelling_; }

    bool operator()(const ProductPoint& x) const;

private:
    std::vector<std::vector<std::uint8_t>> patterns_;
    std::vector<std::string> spelling_;
    double integral_ = 1.0;
};

CylinderFunction cylinder_function(const ProductSystem& system, std::vector<std::string> patterns);

bool matches_prefix(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> pattern);

}  // namespace rectdim
