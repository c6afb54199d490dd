#include "rectdim/odometer.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "rectdim/random.hpp"

namespace rectdim {

namespace {

std::uint64_t magnitude(std::int64_t j) {
    return j < 0 ? ~static_cast<std::uint64_t>(j) + 1 : static_cast<std::uint64_t>(j);
}

}  // namespace

bool add_magnitude(std::vector<std::uint8_t>& bits, std::uint64_t m) {
    std::uint8_t carry = 0;
    std::size_t i = 0;
    for (; i < bits.size() && (m != 0 || carry != 0); ++i) {
        const std::uint8_t s = static_cast<std::uint8_t>(bits[i] + (m & 1U) + carry);
        bits[i] = s & 1U;
        carry = s >> 1;
        m >>= 1;
    }
    return m == 0 && carry == 0;
}

bool sub_magnitude(std::vector<std::uint8_t>& bits, std::uint64_t m) {
    std::uint8_t borrow = 0;
    std::size_t i = 0;
    for (; i < bits.size() && (m != 0 || borrow != 0); ++i) {
        const int d = static_cast<int>(bits[i]) - static_cast<int>(m & 1U) - borrow;
        bits[i] = static_cast<std::uint8_t>(d & 1);
        borrow = d < 0 ? 1 : 0;
        m >>= 1;
    }
    return m == 0 && borrow == 0;
}

double binary_entropy(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("probability must lie strictly inside (0,1)");
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// --------------------------------------------------------- OdometerSystem

OdometerSystem::OdometerSystem(std::vector<double> zero_probabilities, bool reversed)
    : p_(std::move(zero_probabilities)), reversed_(reversed), measure_preserving_(true) {
    if (p_.empty()) throw ArgumentError("odometer depth must be at least 1");
    log_zero_.reserve(p_.size());
    log_one_.reserve(p_.size());
    for (double p : p_) {
        if (!(p > 0.0 && p < 1.0)) {
            throw ArgumentError("coordinate measure must lie strictly inside (0,1)");
        }
        log_zero_.push_back(std::log(p));
        log_one_.push_back(std::log1p(-p));
        if (p != 0.5) measure_preserving_ = false;
    }
}

OdometerSystem OdometerSystem::constant(std::size_t depth, double p) {
    return OdometerSystem(std::vector<double>(depth, p));
}

OdometerSystem OdometerSystem::inverse() const { return OdometerSystem(p_, !reversed_); }

OdometerSystem invert(const OdometerSystem& system) { return system.inverse(); }

void OdometerSystem::check_point(const OdometerPoint& x) const {
    if (x.bits.size() != p_.size()) throw ArgumentError("point depth does not match the system");
}

OdometerPoint OdometerSystem::sample(std::uint64_t seed) const {
    Engine rng(seed);
    OdometerPoint x;
    x.bits.resize(p_.size());
    for (std::size_t i = 0; i < p_.size(); ++i) x.bits[i] = uniform01(rng) < p_[i] ? 0 : 1;
    return x;
}

OdometerPoint OdometerSystem::apply_power(const OdometerPoint& x, std::int64_t j) const {
    check_point(x);
    const std::uint64_t m = magnitude(j);
    if (p_.size() <= 64 && m >= (std::uint64_t{1} << (p_.size() - 1))) {
        throw ArgumentError("power exceeds half the odometer period");
    }
    const bool forward = (j >= 0) != reversed_;
    OdometerPoint y = x;
    const bool ok = forward ? add_magnitude(y.bits, m) : sub_magnitude(y.bits, m);
    if (!ok) throw HorizonOverflow("carry crossed the truncation horizon");
    return y;
}

double OdometerSystem::log_cocycle(const OdometerPoint& x, std::int64_t j) const {
    if (j == 0) return 0.0;
    const OdometerPoint y = apply_power(x, j);
    double acc = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
        if (y.bits[i] != x.bits[i]) acc += log_mass(i, y.bits[i]) - log_mass(i, x.bits[i]);
    }
    return acc;
}

double OdometerSystem::entropy_average(const OdometerPoint& x, std::size_t n) const {
    check_point(x);
    if (n == 0 || n > p_.size()) throw ArgumentError("entropy average needs 1 <= n <= depth");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::log2(x.bits[i] ? 1.0 - p_[i] : p_[i]);
    return -acc / static_cast<double>(n);
}

double OdometerSystem::mean_entropy() const {
    double acc = 0.0;
    for (double p : p_) acc += binary_entropy(p);
    return acc / static_cast<double>(p_.size());
}

// ---------------------------------------------------------- CocycleWalker

CocycleWalker::CocycleWalker(const OdometerSystem& system, const OdometerPoint& x, int direction)
    : system_(&system), bits_(x.bits) {
    system.check_point(x);
    if (direction != 1 && direction != -1) throw ArgumentError("walker direction must be +1 or -1");
    const bool forward = (direction > 0) != system.reversed();
    carry_digit_ = forward ? 1 : 0;
}

double CocycleWalker::step() {
    // Forward: trailing 1s become 0 and the first 0 becomes 1. Backward is the
    // mirror image with the digits exchanged.
    const double sign = carry_digit_ == 1 ? -1.0 : 1.0;
    const std::size_t n = bits_.size();
    std::size_t m = 0;
    double delta = 0.0;
    while (m < n && bits_[m] == carry_digit_) {
        bits_[m] = static_cast<std::uint8_t>(1 - carry_digit_);
        delta += sign * system_->flip_gain(m);
        ++m;
    }
    if (m == n) throw HorizonOverflow("carry crossed the truncation horizon");
    bits_[m] = carry_digit_;
    delta -= sign * system_->flip_gain(m);
    log_weight_ += delta;
    ++steps_;
    return log_weight_;
}

// ---------------------------------------------------------- ProductSystem

ProductSystem::ProductSystem(std::vector<OdometerSystem> components) : components_(std::move(components)) {
    if (components_.empty()) throw ArgumentError("product system needs at least one component");
}

bool ProductSystem::measure_preserving() const noexcept {
    for (const auto& c : components_) {
        if (!c.measure_preserving()) return false;
    }
    return true;
}

ProductPoint ProductSystem::sample(std::uint64_t seed) const {
    ProductPoint x;
    x.reserve(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) x.push_back(components_[i].sample(derive_seed(seed, i)));
    return x;
}

ProductPoint ProductSystem::apply(const ProductPoint& x, std::span<const std::int64_t> u) const {
    if (x.size() != components_.size() || u.size() != components_.size()) {
        throw ArgumentError("dimension mismatch");
    }
    ProductPoint y;
    y.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y.push_back(components_[i].apply_power(x[i], u[i]));
    return y;
}

double ProductSystem::log_cocycle(const ProductPoint& x, std::span<const std::int64_t> u) const {
    if (x.size() != components_.size() || u.size() != components_.size()) {
        throw ArgumentError("dimension mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += components_[i].log_cocycle(x[i], u[i]);
    return acc;
}

// ------------------------------------------------------- CylinderFunction

bool matches_prefix(std::span<const std::uint8_t> bits, std::span<const std::uint8_t> pattern) {
    if (pattern.size() > bits.size()) return false;
    for (std::size_t m = 0; m < pattern.size(); ++m) {
        if (bits[m] != pattern[m]) return false;
    }
    return true;
}

CylinderFunction::CylinderFunction(const ProductSystem& system, std::vector<std::string> patterns)
    : spelling_(std::move(patterns)) {
    if (spelling_.size() != system.dimension()) {
        throw ArgumentError("need one pattern per component (use \"\" for no constraint)");
    }
    for (std::size_t i = 0; i < spelling_.size(); ++i) {
        const auto& c = system.component(i);
        const std::string& s = spelling_[i];
        if (s.size() > c.depth()) throw ArgumentError("cylinder pattern longer than the odometer depth");
        std::vector<std::uint8_t> pat;
        pat.reserve(s.size());
        for (std::size_t m = 0; m < s.size(); ++m) {
            if (s[m] != '0' && s[m] != '1') throw ArgumentError("cylinder patterns use digits 0 and 1");
            const std::uint8_t b = s[m] == '1' ? 1 : 0;
            pat.push_back(b);
            integral_ *= b ? 1.0 - c.zero_probability(m) : c.zero_probability(m);
        }
        patterns_.push_back(std::move(pat));
    }
}

bool CylinderFunction::operator()(const ProductPoint& x) const {
    if (x.size() != patterns_.size()) throw ArgumentError("dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!matches_prefix(x[i].bits, patterns_[i])) return false;
    }
    return true;
}

CylinderFunction cylinder_function(const ProductSystem& system, std::vector<std::string> patterns) {
    return CylinderFunction(system, std::move(patterns));
}

}  // namespace rectdim
