// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edsbt {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position()` is a 1-based column.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " at offset " + std::to_string(position)), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Identifier that is neither a declared coordinate, parameter nor function.
class UndeclaredIdentifier : public ParseError {
public:
    UndeclaredIdentifier(const std::string& name, std::size_t position)
        : ParseError("undeclared identifier '" + name + "'", position), name_(name) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

/// Evaluation left the domain of a function (ln, sqrt, division, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Too many sample points were rejected by the guard.
class SamplingExhausted : public Error {
public:
    using Error::Error;
};

/// Two objects built on different coordinate charts were combined.
class ChartMismatch : public Error {
public:
    using Error::Error;
};

/// Coframe matrix singular or too ill-conditioned at a point.
class SingularCoframe : public Error {
public:
    using Error::Error;
};

/// A precondition of a geometric check does not hold on the samples.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Monge-Ampere or Backlund data that is degenerate on the samples.
class DegenerateSystem : public Error {
public:
    using Error::Error;
};

/// Coframe is not a section of the G-structure or breaks a structural zero.
class InvalidSection : public Error {
public:
    using Error::Error;
};

/// Malformed system-definition file. `line()` is 1-based.
class DefinitionError : public Error {
public:
    DefinitionError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Numerical root solve or ODE integration failed.
class IntegrationError : public Error {
public:
    using Error::Error;
};

}  // namespace edsbt
