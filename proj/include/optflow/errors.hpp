#pragma once

#include <stdexcept>
#include <string>

namespace optflow {

/// Malformed or dimensionally inconsistent input.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative projector (intersection oracle) failed to certify its answer.
class OracleFailure : public std::runtime_error {
public:
  OracleFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// A runtime monitor detected a broken invariant (non-finite state, ...).
class InvariantViolation : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace optflow
