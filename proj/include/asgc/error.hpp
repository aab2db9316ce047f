#pragma once

#include <stdexcept>
#include <string>

namespace asgc {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes disagree (rows, columns, vector lengths).
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A precondition on an argument value was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed content in a data or configuration file.
class ParseError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require_same(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) + " != " +
                            std::to_string(b));
  }
}

}  // namespace detail
}  // namespace asgc
