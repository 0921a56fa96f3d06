#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mks {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments that violate a documented precondition.
class InvalidInput : public Error {
public:
    using Error::Error;
};

class InvalidOrder : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

/// The cardinality conditions for a shift vector are singular.
class DegenerateShifts : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class InvalidRegion : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class CannotRefine : public Error {
public:
    using Error::Error;
};

/// Normal matrix of the least-squares baseline is not positive definite.
class RankDeficient : public Error {
public:
    using Error::Error;
};

/// Reading or writing a stream or file failed.
class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    enum class Kind {
        malformed_header,
        malformed_line,
        non_contiguous_channels,
        negative_count,
        too_few_channels,
        malformed_document,
    };

    ParseError(Kind kind, std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    /// 1-based line number of the offending input line (0 when not line-oriented).
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

}  // namespace mks
