#pragma once

#include <stdexcept>
#include <string>

namespace ngnn {

/// Raised when arguments violate a documented precondition or invariant.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for inputs the library can represent but does not process
/// (e.g. edge features in the GIN layer).
class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when training produces a non-finite loss.
class Divergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace ngnn
