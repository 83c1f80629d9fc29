#pragma once

#include <stdexcept>
#include <string>

namespace cbsim {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad flags, bad hyperparameters, bad schema
/// declarations, preconditions on caller-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Problems with input data or serialized files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A file does not have the declared columns/layout.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// A specific input row is malformed; the message carries file and line.
class RowError : public DataError {
 public:
  using DataError::DataError;
};

/// A serialized environment file is unreadable: bad magic, version,
/// checksum, or truncation.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// An internal invariant was violated (degenerate vectors, index bugs).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbsim
