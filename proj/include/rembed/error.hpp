#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rembed {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Argument violates a documented precondition (bad config, non-finite input, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Malformed dataset text. Carries the 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Model file is unreadable, truncated, corrupt or of an unknown version.
class ModelFormatError : public Error {
public:
    using Error::Error;
};

}  // namespace rembed
