#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmw {

/// Domain error raised when an operation's precondition is violated.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised by the formula parser; carries the byte offset of the failure.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, std::size_t pos)
      : Error(msg + " at position " + std::to_string(pos)), pos_(pos) {}

  std::size_t position() const { return pos_; }

private:
  std::size_t pos_;
};

/// Raised when a search space or memo table exceeds its configured bound.
class BoundExceeded : public Error {
public:
  using Error::Error;
};

} // namespace fmw
