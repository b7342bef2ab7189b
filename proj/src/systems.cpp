#include "omega_limit/systems.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "omega_limit/error.hpp"

namespace omega_limit {

void LorenzParams::validate() const {
  auto require_positive = [](double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw Error(ErrorKind::validation, std::string("lorenz parameter ") + name + " must be > 0");
    }
  };
  require_positive(sigma, "sigma");
  require_positive(b, "b");
  require_positive(r, "r");
}

LorenzParams LorenzParams::with_r(double r) {
  LorenzParams p;
  p.r = r;
  return p;
}

SystemSpec::SystemSpec(std::string name, std::size_t dimension, ParamMap params, Field field,
                       Jacobian jacobian)
    : name_(std::move(name)),
      dimension_(dimension),
      params_(std::move(params)),
      field_(std::move(field)),
      jacobian_(std::move(jacobian)) {
  if (dimension_ == 0 || dimension_ > kMaxDimension) {
    throw Error(ErrorKind::validation, "system dimension must be 1, 2 or 3");
  }
  if (!field_ || !jacobian_) throw Error(ErrorKind::validation, "system needs a field and a Jacobian");
}

double SystemSpec::param(std::string_view key) const {
  auto it = params_.find(key);
  if (it == params_.end()) {
    throw Error(ErrorKind::lookup, "system " + name_ + " has no parameter " + std::string(key));
  }
  return it->second;
}

SystemSpec SystemSpec::time_reversed() const {
  auto f = field_;
  auto j = jacobian_;
  return SystemSpec(
      name_ + "_reversed", dimension_, params_, [f](const StateVec& y) { return -f(y); },
      [j, n = dimension_](const StateVec& y) {
        Matrix m = j(y);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < n; ++c) m(r, c) = -m(r, c);
        }
        return m;
      });
}

namespace {

void check_state(const SystemSpec& system, const StateVec& state) {
  if (state.size() != system.dimension()) {
    throw Error(ErrorKind::invalid_input, "state has dimension " + std::to_string(state.size()) +
                                              ", system " + system.name() + " expects " +
                                              std::to_string(system.dimension()));
  }
  if (!state.is_finite()) throw Error(ErrorKind::invalid_input, "state is not finite");
}

// (1-y)(2-y)(3-y)(4-y)(5-y): the factored form keeps the roots exact.
SystemSpec make_quintic() {
  auto field = [](const StateVec& s) {
    const double y = s[0];
    return StateVec{(1.0 - y) * (2.0 - y) * (3.0 - y) * (4.0 - y) * (5.0 - y)};
  };
  auto jacobian = [](const StateVec& s) {
    const double y = s[0];
    double d = 0.0;
    for (int skip = 1; skip <= 5; ++skip) {
      double prod = -1.0;
      for (int k = 1; k <= 5; ++k) {
        if (k != skip) prod *= (k - y);
      }
      d += prod;
    }
    return Matrix(1, {d});
  };
  return SystemSpec("quintic1d", 1, {}, field, jacobian);
}

SystemSpec make_vanderpol(double mu) {
  auto field = [mu](const StateVec& s) {
    const double x = s[0], y = s[1];
    return StateVec{y, mu * (1.0 - x * x) * y - x};
  };
  auto jacobian = [mu](const StateVec& s) {
    const double x = s[0], y = s[1];
    return Matrix(2, {0.0, 1.0, -2.0 * mu * x * y - 1.0, mu * (1.0 - x * x)});
  };
  return SystemSpec("vanderpol", 2, {{"mu", mu}}, field, jacobian);
}

SystemSpec make_brusselator(double a, double b) {
  auto field = [a, b](const StateVec& s) {
    const double x = s[0], y = s[1];
    const double x2y = x * x * y;
    return StateVec{a - (b + 1.0) * x + x2y, b * x - x2y};
  };
  auto jacobian = [b](const StateVec& s) {
    const double x = s[0], y = s[1];
    return Matrix(2, {-(b + 1.0) + 2.0 * x * y, x * x, b - 2.0 * x * y, -x * x});
  };
  return SystemSpec("brusselator", 2, {{"a", a}, {"b", b}}, field, jacobian);
}

void require_positive(const ParamMap& p, const std::string& system) {
  for (const auto& [key, value] : p) {
    if (!(std::isfinite(value) && value > 0.0)) {
      throw Error(ErrorKind::validation, system + " parameter " + key + " must be > 0");
    }
  }
}

ParamMap merge_params(std::string_view name, const ParamMap& given) {
  ParamMap merged = default_params(name);
  for (const auto& [key, value] : given) {
    auto it = merged.find(key);
    if (it == merged.end()) {
      throw Error(ErrorKind::validation,
                  "unknown parameter '" + key + "' for system " + std::string(name));
    }
    it->second = value;
  }
  require_positive(merged, std::string(name));
  return merged;
}

}  // namespace

StateVec eval_field(const SystemSpec& system, const StateVec& state) {
  check_state(system, state);
  return system.rhs(state);
}

Matrix eval_jacobian(const SystemSpec& system, const StateVec& state) {
  check_state(system, state);
  return system.jac(state);
}

SystemSpec lorenz(const LorenzParams& params) {
  params.validate();
  const double sigma = params.sigma, b = params.b, r = params.r;
  auto field = [sigma, b, r](const StateVec& s) {
    const double x = s[0], y = s[1], z = s[2];
    return StateVec{sigma * (y - x), r * x - y - x * z, -b * z + x * y};
  };
  auto jacobian = [sigma, b, r](const StateVec& s) {
    const double x = s[0], y = s[1], z = s[2];
    return Matrix(3, {-sigma, sigma, 0.0,  //
                      r - z, -1.0, -x,     //
                      y, x, -b});
  };
  return SystemSpec("lorenz", 3, {{"sigma", sigma}, {"b", b}, {"r", r}}, field, jacobian);
}

LorenzParams lorenz_params(const SystemSpec& system) {
  if (system.name() != "lorenz") {
    throw Error(ErrorKind::lookup, "system " + system.name() + " is not lorenz");
  }
  return LorenzParams{system.param("sigma"), system.param("b"), system.param("r")};
}

std::vector<std::string> builtin_names() { return {"quintic1d", "vanderpol", "brusselator", "lorenz"}; }

ParamMap default_params(std::string_view name) {
  if (name == "quintic1d") return {};
  if (name == "vanderpol") return {{"mu", 1.0}};
  if (name == "brusselator") return {{"a", 1.0}, {"b", 3.0}};
  if (name == "lorenz") {
    const LorenzParams d;
    return {{"sigma", d.sigma}, {"b", d.b}, {"r", d.r}};
  }
  throw Error(ErrorKind::lookup, "unknown system '" + std::string(name) + "'");
}

SystemSpec builtin(std::string_view name, const ParamMap& params) {
  const ParamMap p = merge_params(name, params);
  if (name == "quintic1d") return make_quintic();
  if (name == "vanderpol") return make_vanderpol(p.at("mu"));
  if (name == "brusselator") return make_brusselator(p.at("a"), p.at("b"));
  return lorenz(LorenzParams{p.at("sigma"), p.at("b"), p.at("r")});
}

}  // namespace omega_limit
