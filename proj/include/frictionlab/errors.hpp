#pragma once

#include <stdexcept>
#include <string>

namespace frictionlab {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A friction evaluation hit the pole at alpha = -1.
struct DivergenceError : Error {
    explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

// An argument violates a declared range or shape constraint.
struct ParameterError : Error {
    explicit ParameterError(const std::string& msg) : Error(msg) {}
};

// Vector/matrix dimensions do not agree.
struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

// Input data is degenerate for the requested operation (zero norm, empty, ...).
struct DegenerateInputError : Error {
    explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

// Result is undefined for the given inputs (zero total stake, zero denominator, ...).
struct UndefinedError : Error {
    explicit UndefinedError(const std::string& msg) : Error(msg) {}
};

// Mutation kernel is reducible or periodic.
struct ErgodicityError : Error {
    explicit ErgodicityError(const std::string& msg) : Error(msg) {}
};

// An iterative solver failed to converge.
struct IterationError : Error {
    IterationError(const std::string& msg, double residual)
        : Error(msg), final_residual(residual) {}
    double final_residual;
};

// Numeric breakdown (non-finite values) during integration or training.
struct NumericError : Error {
    NumericError(const std::string& msg, long step)
        : Error(msg), step_index(step) {}
    long step_index;
};

// Instance too large for an exhaustive method.
struct SizeError : Error {
    explicit SizeError(const std::string& msg) : Error(msg) {}
};

// Partition is not lumpable at the requested tolerance.
struct LumpabilityError : Error {
    explicit LumpabilityError(const std::string& msg) : Error(msg) {}
};

}  // namespace frictionlab
