#pragma once

#include <stdexcept>
#include <string>

namespace sbneuro {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input data, configuration or precondition problem.
struct InputError : Error {
    using Error::Error;
};

/// Numerical failure (iteration caps, blow-ups).
struct NumericalError : Error {
    using Error::Error;
};

struct InvalidParams : InputError {
    using InputError::InputError;
};

struct NonConvergence : NumericalError {
    NonConvergence(const std::string& what, double residual)
        : NumericalError(what), residual(residual)
    {
    }
    double residual;
};

struct ThresholdOutOfRange : NumericalError {
    using NumericalError::NumericalError;
};

struct TooFewPoints : InputError {
    using InputError::InputError;
};

struct NonUniformBias : InputError {
    using InputError::InputError;
};

struct ZeroVds : InputError {
    using InputError::InputError;
};

struct DegenerateFit : InputError {
    using InputError::InputError;
};

struct NonFiniteState : NumericalError {
    using NumericalError::NumericalError;
};

struct NonPositiveCurrent : InputError {
    using InputError::InputError;
};

struct InconsistentRatio : InputError {
    using InputError::InputError;
};

struct EmptyPartition : InputError {
    using InputError::InputError;
};

} // namespace sbneuro
