#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "omega_limit/state.hpp"

namespace omega_limit {

using ParamMap = std::map<std::string, double, std::less<>>;

/// Lorenz coefficients; defaults give dx/dt = 10(y-x), dz/dt = -(8/3)z + xy.
struct LorenzParams {
  double sigma = 10.0;
  double b = 8.0 / 3.0;
  double r = 28.0;

  /// Throws Error(validation) unless every coefficient is strictly positive.
  void validate() const;

  static LorenzParams with_r(double r);
};

/// An autonomous vector field dy/dt = f(y) with its analytic Jacobian.
///
/// Instances are immutable after construction; the field and Jacobian hold no
/// mutable state and may be shared between threads.
class SystemSpec {
 public:
  using Field = std::function<StateVec(const StateVec&)>;
  using Jacobian = std::function<Matrix(const StateVec&)>;

  SystemSpec(std::string name, std::size_t dimension, ParamMap params, Field field, Jacobian jacobian);

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dimension_; }
  const ParamMap& params() const noexcept { return params_; }
  double param(std::string_view key) const;

  // Unchecked evaluation for integrator hot loops.
  StateVec rhs(const StateVec& y) const { return field_(y); }
  Matrix jac(const StateVec& y) const { return jacobian_(y); }

  /// Same system with f negated; integrating it forward runs the original backward.
  SystemSpec time_reversed() const;

 private:
  std::string name_;
  std::size_t dimension_;
  ParamMap params_;
  Field field_;
  Jacobian jacobian_;
};

StateVec eval_field(const SystemSpec& system, const StateVec& state);
Matrix eval_jacobian(const SystemSpec& system, const StateVec& state);

/// Built-in systems: quintic1d, vanderpol (mu), brusselator (a, b),
/// lorenz (sigma, b, r). Missing parameters take defaults; unknown names
/// raise Error(lookup), unknown or non-positive parameters Error(validation).
SystemSpec builtin(std::string_view name, const ParamMap& params = {});

SystemSpec lorenz(const LorenzParams& params);

/// Recovers the Lorenz coefficients from a lorenz SystemSpec.
LorenzParams lorenz_params(const SystemSpec& system);

std::vector<std::string> builtin_names();
ParamMap default_params(std::string_view name);

}  // namespace omega_limit
