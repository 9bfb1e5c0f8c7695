#pragma once

#include <stdexcept>
#include <string>

namespace ergodica {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input to an operation (bad shapes, nonpositive
/// vectors, non-symmetric matrices).
class InputError : public Error {
public:
  using Error::Error;
};

/// Invalid configuration: unknown catalog entry, bad epsilon list, etc.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A discretization precondition failed (e.g. mixed-term diagonal dominance).
class AssemblyError : public Error {
public:
  using Error::Error;
};

/// Numerical failure: singular system, loss of positivity, no convergence.
class SolverError : public Error {
public:
  using Error::Error;
};

/// Iteration budget exhausted; carries the last measured residual/bracket.
class IterationLimitError : public SolverError {
public:
  IterationLimitError(const std::string& what, double last_residual)
      : SolverError(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

private:
  double last_residual_;
};

/// Policy iteration revisited a policy without improving.
class PolicyCycleError : public SolverError {
public:
  using SolverError::SolverError;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace ergodica
