#pragma once

#include <stdexcept>
#include <string>

namespace dsmc {

/// Raised when a configuration value violates a documented precondition
/// (non-positive gains, rho outside (0,1), malformed scenario files, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a signal value is unusable (non-finite sample, AFR_d <= 0).
struct SignalError : std::runtime_error {
    explicit SignalError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a simulation produces a non-finite state or control.
/// The message carries the step index at which the value first went bad.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised in strict mode when a runtime monitor records a violation
/// (Lyapunov identity residual above tolerance, estimate clamp event).
struct InvariantViolation : std::runtime_error {
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dsmc
