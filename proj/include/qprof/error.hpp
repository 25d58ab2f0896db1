#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qprof {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on caller-supplied arguments was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (index files, model files, CSV). Carries the
/// 1-based line where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qprof
