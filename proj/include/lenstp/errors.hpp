#pragma once

#include <stdexcept>
#include <string>

namespace lenstp {

// Maps to CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Maps to CLI exit code 2 (integrator budgets, Newton divergence, degenerate spectra).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Maps to CLI exit code 3 (a documented post-condition could not be met).
struct ContractViolation : std::runtime_error {
    explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lenstp
