#pragma once

#include <stdexcept>
#include <string>

namespace hypokit {

/// Invalid or inconsistent user-supplied parameters (bad flag values, k=0 where k>=1 needed, ...).
struct ParameterError : std::invalid_argument {
    explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A required piece of configuration is missing (e.g. kappa absent where the final rate needs it).
struct ConfigurationError : std::invalid_argument {
    explicit ConfigurationError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Input data does not carry the entries an operation needs.
struct DataError : std::invalid_argument {
    explicit DataError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Argument outside the mathematical domain of the operation (e.g. t outside (0,1]).
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

/// The requested computation exceeds what the discretization can support.
struct FeasibilityError : std::runtime_error {
    explicit FeasibilityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Runtime failure of a numerical procedure (blow-up, failed positivity check, ...).
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace hypokit
