#pragma once

#include <stdexcept>
#include <string>

namespace casimir_lab {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical or physical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or incomplete configuration (bad grids, weights that do not sum, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data: unreadable CSV, non-monotone tables, zero error bars.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure stopped before reaching its tolerance.
/// Carries the best available estimate and an error bound on it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double partial, double bound)
      : Error(what), partial_(partial), bound_(bound) {}

  double partial() const noexcept { return partial_; }
  double bound() const noexcept { return bound_; }

 private:
  double partial_;
  double bound_;
};

}  // namespace casimir_lab
