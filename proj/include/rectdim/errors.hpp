#pragma once

#include <stdexcept>

namespace rectdim {

/// A half-width, cardinality or offset left the representable integer range.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// A caller violated an operation's stated precondition.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A brute-force routine was asked to enumerate more than it is allowed to.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// A carry or borrow propagated past the truncation depth of an odometer.
class HorizonOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rectdim
