#pragma once

#include <stdexcept>
#include <string>

namespace clic {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad input at a tool boundary (unreadable manifest, unknown scorer,
/// invalid flag value). The CLI maps these to exit code 2.
struct UsageError : Error {
    using Error::Error;
};

struct DecodeError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct OutOfBounds : Error {
    using Error::Error;
};
struct ImageTooSmall : Error {
    using Error::Error;
};
struct InvalidC : UsageError {
    using UsageError::UsageError;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct NormalizationDegenerate : Error {
    using Error::Error;
};
struct EmptyQueue : Error {
    using Error::Error;
};
struct BatchSizeMismatch : Error {
    using Error::Error;
};
struct EmptyPositives : Error {
    using Error::Error;
};
struct EmptyDataset : Error {
    using Error::Error;
};
struct DegenerateVariance : Error {
    using Error::Error;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct UnknownScorer : UsageError {
    using UsageError::UsageError;
};
struct BadThresholds : UsageError {
    using UsageError::UsageError;
};

}  // namespace clic
