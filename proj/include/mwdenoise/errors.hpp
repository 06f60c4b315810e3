#pragma once

#include <stdexcept>
#include <string>

namespace mwd {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor/image dimensions do not satisfy an operation's contract.
struct ShapeError : Error {
  using Error::Error;
};

/// Invalid model or run configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// Malformed file contents, unreadable inputs, out-of-bounds ROIs.
struct DataError : Error {
  using Error::Error;
};

/// Non-finite values where finite ones are required (e.g. training loss).
struct NumericError : Error {
  using Error::Error;
};

}  // namespace mwd
