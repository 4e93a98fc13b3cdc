#pragma once

#include <stdexcept>
#include <string>

namespace trigzero {

/// Rejected input: a parameter outside its domain or a malformed declaration.
/// The message names the offending field.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not reach its contract (quadrature budget,
/// degenerate variance, embedding failure, ...).
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace trigzero
