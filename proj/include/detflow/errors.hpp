#pragma once

#include <stdexcept>
#include <string>

namespace detflow {

/// Structural problems: mismatched resolutions, malformed operands.
struct StructuralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A stated precondition of an operation does not hold for the given data.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Invalid configuration or config file. CLI exit code 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite state encountered during time integration. CLI exit code 3.
struct BlowUpError : std::runtime_error {
    BlowUpError(const std::string& what, double time)
        : std::runtime_error(what), time(time) {}
    double time;
};

/// Horizon too short for an asymptotic quantity to be trustworthy.
struct InsufficientHorizonError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace detflow
