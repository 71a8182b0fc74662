// errors.hpp — exception types shared across the library
#pragma once

#include <stdexcept>
#include <string>

namespace deltasim {

/// Invalid or inconsistent configuration (bad field value, unknown key, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The steady state of a Liouvillian is not unique.
struct SingularSystemError : std::runtime_error {
    explicit SingularSystemError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A solved density matrix violates trace/Hermiticity/positivity bounds.
struct InvariantViolation : std::runtime_error {
    explicit InvariantViolation(const std::string& msg) : std::runtime_error(msg) {}
};

/// Fixed-point iteration exhausted max_iter without reaching tolerance.
struct NonConvergenceError : std::runtime_error {
    NonConvergenceError(const std::string& msg, double last_residual)
        : std::runtime_error(msg), residual(last_residual) {}
    double residual;
};

/// Fixed-point iteration produced an unbounded field amplitude.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace deltasim
