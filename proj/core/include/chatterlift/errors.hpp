#pragma once

#include <stdexcept>
#include <string>

namespace chatterlift {

/// Input outside the physical or mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A matrix that must be inverted is singular (e.g. a rigid-body mode under ZOH).
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The perturbed-identity factor of the closed loop is numerically singular.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(double axial_depth, double rcond);

    double axial_depth() const noexcept { return axial_depth_; }
    double reciprocal_condition() const noexcept { return rcond_; }

private:
    double axial_depth_;
    double rcond_;
};

/// Iterative numerical kernel failed to converge.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Time-marching oracle produced a non-finite state.
class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(int period_index);

    int period_index() const noexcept { return period_index_; }

private:
    int period_index_;
};

}  // namespace chatterlift
