#pragma once

#include <stdexcept>

namespace vmr {

// An operation rejected its input: shape mismatch, bad argument, violated
// precondition.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite values or a failed numeric procedure.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset files, sampling preconditions, degenerate data.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Config file or run configuration problems.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem read/write failures.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A backward pass was asked for state the forward pass did not cache.
struct InternalStateError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace vmr
