#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pgeval {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid numeric parameter (spacing, grid size, filter settings, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Input data violates a documented precondition.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Malformed input document. `offset()` is the byte position of the
/// failure when known.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
    explicit ParseError(const std::string& what) : Error(what) {}

    [[nodiscard]] std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_ = 0;
};

/// A road map with no usable roads.
class EmptyMapError : public Error {
public:
    using Error::Error;
};

} // namespace pgeval
