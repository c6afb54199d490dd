#pragma once

#include <cmath>
#include <limits>

namespace rectdim {

/// Running log(sum exp(v_k)) with one exp per term. An empty accumulator
/// represents log 0 = -inf.
class LogSumExp {
public:
    void add(double v) noexcept {
        if (v == -std::numeric_limits<double>::infinity()) return;
        if (v <= max_) {
            scaled_ += std::exp(v - max_);
        } else {
            scaled_ = scaled_ * std::exp(max_ - v) + 1.0;
            max_ = v;
        }
    }

    void merge(const LogSumExp& other) noexcept {
        if (other.scaled_ == 0.0) return;
        if (scaled_ == 0.0) {
            *this = other;
        } else if (other.max_ <= max_) {
            scaled_ += other.scaled_ * std::exp(other.max_ - max_);
        } else {
            scaled_ = scaled_ * std::exp(max_ - other.max_) + other.scaled_;
            max_ = other.max_;
        }
    }

    double value() const noexcept {
        if (scaled_ == 0.0) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(scaled_);
    }

    bool empty() const noexcept { return scaled_ == 0.0; }

private:
    double max_ = -std::numeric_limits<double>::infinity();
    double scaled_ = 0.0;
};

/// log(exp(a) + exp(b)).
inline double log_add(double a, double b) noexcept {
    LogSumExp acc;
    acc.add(a);
    acc.add(b);
    return acc.value();
}

}  // namespace rectdim
