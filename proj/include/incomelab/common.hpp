#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace incomelab {

/// Base of every error the library raises. The CLI maps the kind to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid inputs, configuration or parameter sets (caller error).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of a density or operation.
class DomainError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Runtime numeric failure: overflow, non-finite state, divergent integral.
class NumericError : public Error {
 public:
  using Error::Error;
};

class NonNormalizableError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A process that has no stationary law in the requested regime.
class NoStationaryDistribution : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Ordered time/value series produced by every simulator.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] double back() const { return values.back(); }
};

/// sign(0) is 0 so the sign-restoring drift has no bias at the fixed point.
constexpr double sign(double x) {
  return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
}

}  // namespace incomelab
