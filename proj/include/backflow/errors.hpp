#pragma once

#include <stdexcept>
#include <string>

namespace backflow {

// Base class for every error raised by the library. The CLI maps these to
// stable exit codes: configuration problems -> 2, numerical failures -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Precondition / configuration errors (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidScalesError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidSlopeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidRuleError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class UnsupportedShapeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IncompatibleOperandsError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DegenerateFitError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidTimeError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class WindowTooNarrowError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Numerical failures (exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class AssemblyInconsistencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolverFailureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class LeakageError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace backflow
