#pragma once

#include <stdexcept>
#include <string>

namespace nldv {

/// Base class of every error raised by the library. The CLI maps
/// InputError to exit status 2 and everything else to exit status 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Quadratic form of the anisotropy field is not positive.
class EllipticityError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input (bad measure, missing tail information, ...).
class InputError : public Error {
public:
    using Error::Error;
};

/// Problem too large for dense storage, or support outside the lattice.
class CapacityError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    SolverError(const std::string& what, double condition_estimate)
        : Error(what), condition_estimate_(condition_estimate) {}
    double condition_estimate() const { return condition_estimate_; }

private:
    double condition_estimate_;
};

class IterationError : public Error {
public:
    IterationError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

class PositivityError : public Error {
public:
    using Error::Error;
};

class OptimizationError : public Error {
public:
    using Error::Error;
};

/// FFT lattice too coarse (grid doubling changed the result beyond tolerance).
class ResolutionError : public Error {
public:
    using Error::Error;
};

class OracleInconsistencyError : public Error {
public:
    using Error::Error;
};

class ReconstructionError : public Error {
public:
    using Error::Error;
};

}  // namespace nldv
