#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace omega_limit {

enum class ErrorKind {
  invalid_input,
  lookup,
  validation,
  budget,
  stiffness,
  divergence,
  range,
  convergence,
  singularity,
  bracket,
  insufficient_data,
  consistency,
  config,
  io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the toolkit; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when the integrator produces a non-finite or runaway state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, double last_good_time);

  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

}  // namespace omega_limit
