#pragma once

#include <stdexcept>
#include <string>

namespace discovars {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed or unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Raised when a numerical routine cannot produce a valid answer
/// (rank deficiency, non-convergence, singular systems).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Raised for invalid caller-supplied parameters.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace discovars
