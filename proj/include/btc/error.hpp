#ifndef BTC_ERROR_HPP
#define BTC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace btc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or dimensions that do not line up.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// A distribution or prior parameter outside its support.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration (iterations, burn-in, rank, empty chains).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Numerical breakdown, e.g. a precision matrix that fails to factor.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace btc

#endif  // BTC_ERROR_HPP
