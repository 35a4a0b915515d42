#pragma once

#include <stdexcept>
#include <string>

namespace mgtkit {

/// Base class for all mgtkit errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input data (bad record, bad schema). Carries a 1-based line
/// number when the source is a line-delimited file, 0 otherwise.
class ParseError : public Error {
  public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + msg : msg), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// A contract precondition or invariant was violated by the caller.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Transport-level failure talking to a remote endpoint.
class NetworkError : public Error {
  public:
    using Error::Error;
};

/// A remote endpoint answered, but the payload does not satisfy the
/// documented response shape.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Credential rejected by a provider; never retried.
class AuthError : public Error {
  public:
    using Error::Error;
};

/// All retry attempts exhausted; carries the last provider response.
class RetryError : public Error {
  public:
    RetryError(const std::string& msg, std::string last_response)
        : Error(msg), last_response_(std::move(last_response)) {}
    const std::string& last_response() const { return last_response_; }

  private:
    std::string last_response_;
};

}  // namespace mgtkit
