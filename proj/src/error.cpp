#include "omega_limit/error.hpp"

namespace omega_limit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::lookup: return "lookup";
    case ErrorKind::validation: return "validation";
    case ErrorKind::budget: return "budget";
    case ErrorKind::stiffness: return "stiffness";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::range: return "range";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::singularity: return "singularity";
    case ErrorKind::bracket: return "bracket";
    case ErrorKind::insufficient_data: return "insufficient_data";
    case ErrorKind::consistency: return "consistency";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

DivergenceError::DivergenceError(const std::string& message, double last_good_time)
    : Error(ErrorKind::divergence, message), last_good_time_(last_good_time) {}

}  // namespace omega_limit
