#pragma once

#include <stdexcept>
#include <string>

namespace camfse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (truncated files, geometry mismatch,
/// out-of-range indices, I/O failures).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The matching area around a lost block contains no usable sample.
class EmptyRingError : public Error {
 public:
  using Error::Error;
};

/// A weighting volume has no positive weight, so no model can be fitted.
class NoSupportError : public Error {
 public:
  using Error::Error;
};

/// The training data does not describe a decreasing line.
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

}  // namespace camfse
