#pragma once

#include <stdexcept>
#include <string>

namespace sdg {

/// Bad arguments or malformed inputs. Maps to CLI exit code 1.
struct InvalidInput : std::invalid_argument {
    explicit InvalidInput(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A required certificate or configuration item is missing.
struct ConfigurationError : std::runtime_error {
    explicit ConfigurationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An iterative solver failed to reach its tolerance. Maps to CLI exit code 2.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The discretization lost its positive-type property at a named node.
struct MonotonicityError : std::runtime_error {
    explicit MonotonicityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A marcher produced NaN or lost positivity.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A certificate inequality failed numerically where the method requires it.
struct CertificateViolation : std::runtime_error {
    explicit CertificateViolation(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sdg
