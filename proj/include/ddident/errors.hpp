#pragma once

#include <stdexcept>
#include <string>

namespace ddident {

/// Base class of all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad argument, bad configuration, or violated precondition. CLI exit code 2.
struct ValidationError : Error {
    using Error::Error;
};

/// Numerical breakdown: underflowing normalization weights, degenerate poles,
/// failed decompositions. CLI exit code 3.
struct NumericError : Error {
    using Error::Error;
};

/// A sampled signal does not cover the integration support a quadrature needs.
struct CoverageError : ValidationError {
    using ValidationError::ValidationError;
};

}  // namespace ddident
