#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lensdepth {

// Base of every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operands live in different spaces or have incompatible shapes.
class MismatchError : public Error {
public:
    using Error::Error;
};

// Input outside an operation's domain (n < 2, empty set, s <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// A value violates a representation invariant (unit norm, orthonormal frame, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Malformed textual input. `offset` is a byte offset into the parsed text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), message_(what), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }
    // The description without the offset suffix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t offset_;
};

}  // namespace lensdepth
