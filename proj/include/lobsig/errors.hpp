#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lobsig {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data; carries the 1-based line number when known.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// A domain invariant was violated by otherwise well-formed data.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or out-of-range parameter.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An iterative solver failed to converge; carries the iteration count.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, long iterations)
        : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
          iterations_(iterations) {}
    long iterations() const { return iterations_; }

private:
    long iterations_;
};

/// A quantity is mathematically undefined for the given input
/// (zero-volume Amihud ratio, empty-book imbalance, constant score vector).
class UndefinedValueError : public Error {
public:
    using Error::Error;
};

}  // namespace lobsig
