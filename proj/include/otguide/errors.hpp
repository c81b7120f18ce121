#pragma once

#include <stdexcept>
#include <string>

namespace otguide {

// Base for every error raised by the library. The CLI maps subclasses of
// InputError to exit code 2 and subclasses of NumericalError to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InputError : public Error {
public:
    using Error::Error;
};

// Mismatched dimensions between operands.
class ShapeError : public InputError {
public:
    using InputError::InputError;
};

// Argument outside the mathematical domain of an operation (zero norm,
// negative mass, ...).
class DomainError : public InputError {
public:
    using InputError::InputError;
};

class ArgumentError : public InputError {
public:
    using InputError::InputError;
};

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

// The brute-force transport oracle only handles small uniform square problems.
class CapabilityError : public InputError {
public:
    using InputError::InputError;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Raised when the geodesic distance gradient is requested at (near-)collinear
// vectors, where d/dx arccos(x) is unbounded.
class SingularGradientError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonConvergenceError : public NumericalError {
public:
    NonConvergenceError(const std::string& what, int iterations)
        : NumericalError(what), iterations_(iterations) {}

    int iterations() const noexcept { return iterations_; }

private:
    int iterations_;
};

}  // namespace otguide
