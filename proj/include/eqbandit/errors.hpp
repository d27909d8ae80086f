#pragma once

#include <stdexcept>
#include <string>

namespace eqbandit {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument, wrong dimension, out-of-range action or parameter.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Fixed-point iteration did not settle within its iteration budget.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Discretized dynamics left their stable regime (e.g. Euler factor <= 0).
class DynamicsInstability : public Error {
 public:
  using Error::Error;
};

/// A tabulated map was queried outside its table.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Epoch schedule exceeded the integer range.
class ScheduleOverflow : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace eqbandit
