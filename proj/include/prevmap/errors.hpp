#pragma once

#include <stdexcept>
#include <string>

namespace prevmap {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that fails validation or ingestion (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numeric degeneracy during a computation (CLI exit code 4).
class ComputationError : public Error {
 public:
  using Error::Error;
};

/// Point lookup outside the enclosing rectangle.
class DomainError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

}  // namespace prevmap
