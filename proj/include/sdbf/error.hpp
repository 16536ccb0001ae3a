#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdbf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A distribution or configuration parameter violates its domain.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Cholesky factorization failed; `minor()` is the 0-based index of the first
/// leading minor that is not positive.
class DecompositionError : public Error {
public:
    DecompositionError(const std::string& what, std::size_t minor) : Error(what), minor_(minor) {}
    std::size_t minor() const noexcept { return minor_; }

private:
    std::size_t minor_;
};

/// Monte Carlo or kernel density estimation could not produce a value.
class EstimationError : public Error {
public:
    using Error::Error;
};

/// An MCMC chain produced a non-finite state.
class ChainError : public Error {
public:
    ChainError(const std::string& what, std::size_t iteration) : Error(what), iteration_(iteration) {}
    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

/// Input data could not be read or is unusable. `line()` is 1-based, 0 when
/// the problem is not tied to a line.
class IngestionError : public Error {
public:
    IngestionError(const std::string& what, std::size_t line = 0) : Error(what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Division by a zero prior density or probability while assembling a Bayes factor.
class DivisionError : public Error {
public:
    using Error::Error;
};

/// Numerical quadrature did not reach its tolerance.
class OracleError : public Error {
public:
    using Error::Error;
};

}  // namespace sdbf
