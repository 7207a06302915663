#pragma once

#include <stdexcept>
#include <string>

namespace mollow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform (operator products, kron, superoperator action).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Physical or numerical parameters outside their domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed: singular systems, non-convergence, overflow.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration or input files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File-system failures while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mollow
