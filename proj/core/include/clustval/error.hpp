#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clustval {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class HttpError : public Error {
public:
    HttpError(const std::string& what, int status) : Error(what), status_(status) {}
    /// HTTP status of the last attempt, or -1 for transport failures.
    int status() const noexcept { return status_; }

private:
    int status_;
};

class AuthError : public HttpError {
public:
    using HttpError::HttpError;
};

}  // namespace clustval
