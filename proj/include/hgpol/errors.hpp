#pragma once

#include <stdexcept>
#include <string>

namespace hgpol {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Polynomial order above the supported cap.
class UnsupportedOrder : public Error {
public:
    using Error::Error;
};

/// A numerical procedure did not reach its target accuracy, or produced a
/// result that violates a structural check (e.g. a spurious imaginary part).
class NumericFailure : public Error {
public:
    NumericFailure(const std::string& what, double achieved_error)
        : Error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

class DegenerateMatrix : public Error {
public:
    using Error::Error;
};

/// Coherence matrix with a determinant below the roundoff floor.
class RealizabilityViolation : public Error {
public:
    using Error::Error;
};

/// Configuration text that cannot be parsed. Carries the 1-based location.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A parsed configuration that violates an invariant. `field()` names the
/// offending key path, e.g. "source.gamma_xy".
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace hgpol
