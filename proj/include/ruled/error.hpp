#ifndef RULED_ERROR_HPP
#define RULED_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ruled {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the byte offset of the offending token.
class ParseError : public Error {
public:
    enum class Kind { Syntax, UnknownIdentifier, Arity };

    ParseError(Kind kind, const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

    Kind kind() const noexcept { return kind_; }
    std::size_t offset() const noexcept { return offset_; }

private:
    Kind kind_;
    std::size_t offset_;
};

/// Query outside the declared parameter interval (or too close to its boundary).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Expression or profile produced a non-finite or undefined value.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// A geometric standing assumption is violated (torsal generator, sign mismatch, ...).
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// Operation precondition does not hold for the given input.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Integration aborted or diverged.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Invalid surface description file. `path` is a JSON-pointer-like field path.
class SpecError : public Error {
public:
    SpecError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace ruled

#endif // RULED_ERROR_HPP
