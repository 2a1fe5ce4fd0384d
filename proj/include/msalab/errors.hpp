#pragma once

#include <stdexcept>
#include <string>

namespace msalab {

/// Bad arguments or inadmissible configuration. CLI exit code 1.
struct validation_error : std::invalid_argument {
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Problem size over the configured dense cap. CLI exit code 2.
struct capacity_error : std::length_error {
    explicit capacity_error(const std::string& what) : std::length_error(what) {}
};

/// Numerical failure (singular shifts, non-converged solves). CLI exit code 3.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Requested resolvent at an energy inside the spectrum (within tolerance).
struct singular_energy_error : numerical_error {
    explicit singular_energy_error(const std::string& what) : numerical_error(what) {}
};

} // namespace msalab
