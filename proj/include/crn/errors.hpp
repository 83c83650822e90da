#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed network text. `line()` is 1-based; 0 means "whole input".
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Structurally invalid network (self-loop, non-positive rate, degenerate span).
class InvalidNetwork : public Error {
public:
    using Error::Error;
};

/// No positive equilibrium exists, or none was found within the search budget.
class NoEquilibrium : public Error {
public:
    using Error::Error;
};

/// An operation was called outside its documented domain.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Numerical integration could not deliver the requested result.
class IntegrationError : public Error {
public:
    using Error::Error;
};

}  // namespace crn
