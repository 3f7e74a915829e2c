#pragma once

#include <stdexcept>
#include <string>

namespace psqm {

/// Base of every error raised by the library. The CLI maps subclasses to
/// distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands built from different bases, or vectors of the wrong length.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Invalid argument outside the operation's domain (bad index, N < 2, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

class NormalizationError : public Error {
public:
    using Error::Error;
};

/// Probability mass leaked into the top Fock levels beyond the guard.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, double tail_mass)
        : Error(what), tail_mass_(tail_mass) {}
    double tail_mass() const noexcept { return tail_mass_; }

private:
    double tail_mass_;
};

/// Fixed-point or linear-solver failure.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Experiment configuration failed schema validation.
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace psqm
