#pragma once

#include <stdexcept>
#include <string>

namespace cyclordf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Solver non-convergence, indefinite input to a factorization, and the like.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Problem too large for the configured memory or cost budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Two independent precisions disagreed on an integer floor.
class PrecisionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace cyclordf
