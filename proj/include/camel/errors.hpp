#pragma once

#include <stdexcept>
#include <string>

namespace camel {

/// Base class for failures of a numerical procedure (as opposed to bad input,
/// which is reported with std::invalid_argument).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An index formula did not land on an integer.
class IntegralityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A sampled Lagrangian path is too coarse to unwrap arg det w.
class RefinementError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// An eigenvalue sits on the branch cut of the principal logarithm.
class BranchError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// A conjugate point or caustic blocks the requested computation.
class CausticError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// The integrated state became non-finite.
class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, double last_valid_time)
        : NumericalError(what), last_valid_time_(last_valid_time) {}

    double last_valid_time() const noexcept { return last_valid_time_; }

private:
    double last_valid_time_;
};

} // namespace camel
