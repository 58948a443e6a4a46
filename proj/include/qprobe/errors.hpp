// errors.hpp - Exception hierarchy shared by the qprobe library and CLI

#pragma once

#include <stdexcept>
#include <string>

namespace qprobe {

// Invalid user-facing input: bad parameters, mismatched dimensions, bad config.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Failure of a numerical routine (eigensolver, non-finite results).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The trace distance is too close to zero for first-order error propagation.
class DegenerateDistanceError : public NumericError {
public:
    explicit DegenerateDistanceError(double distance);
    double distance() const noexcept { return distance_; }

private:
    double distance_;
};

// A true-value estimate did not meet its refinement criterion.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(double n_reference, double n_refined, double ratio);
    double n_reference() const noexcept { return n_reference_; }
    double n_refined() const noexcept { return n_refined_; }
    double ratio() const noexcept { return ratio_; }

private:
    double n_reference_;
    double n_refined_;
    double ratio_;
};

}  // namespace qprobe
