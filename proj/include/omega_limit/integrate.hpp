#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "omega_limit/state.hpp"
#include "omega_limit/systems.hpp"

namespace omega_limit {

enum class StepMode { fixed, adaptive };

struct IntegratorConfig {
  StepMode mode = StepMode::adaptive;
  double h = 1e-2;  // fixed mode step
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double h_min = 1e-12;
  double h_max = 1.0;
  std::size_t max_steps = 20'000'000;

  /// Throws Error(validation) on non-positive tolerances or steps, h_min > h_max,
  /// or max_steps == 0.
  void validate() const;

  static IntegratorConfig fixed_step(double h);
  static IntegratorConfig adaptive(double rel_tol, double abs_tol);
};

/// States with norm above this are treated as blow-up.
inline constexpr double kDivergenceNorm = 1e8;

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  double min_step = std::numeric_limits<double>::infinity();
  double max_step = 0.0;
};

/// One accepted step with both endpoint states and slopes; enough to build
/// the cubic Hermite interpolant over [t_start, t_end].
struct StepView {
  double t_start;
  const StateVec& y_start;
  const StateVec& f_start;
  double t_end;
  const StateVec& y_end;
  const StateVec& f_end;
};

StateVec hermite_state(const StepView& step, double t);
StateVec hermite_derivative(const StepView& step, double t);

/// Time-ordered accepted samples with piecewise cubic Hermite dense output.
class Trajectory {
 public:
  explicit Trajectory(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }

  double time(std::size_t i) const { return times_[i]; }
  const StateVec& state(std::size_t i) const { return states_[i]; }
  const StateVec& derivative(std::size_t i) const { return derivatives_[i]; }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const StateVec> states() const noexcept { return states_; }

  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  std::size_t segment_count() const noexcept { return times_.empty() ? 0 : times_.size() - 1; }
  StepView segment(std::size_t i) const;

  /// Index of the segment containing t; throws Error(range) outside the span.
  std::size_t segment_index(double t) const;

  /// Dense state at t; sample times return the stored sample exactly.
  StateVec at(double t) const;
  StateVec derivative_at(double t) const;

  const StepStats& stats() const noexcept { return stats_; }

  // Builder interface used by the integrator.
  void append(double t, const StateVec& y, const StateVec& f);
  void set_stats(const StepStats& stats) { stats_ = stats; }

 private:
  std::size_t dimension_;
  std::vector<double> times_;
  std::vector<StateVec> states_;
  std::vector<StateVec> derivatives_;
  StepStats stats_;
};

using StepObserver = std::function<void(const StepView&)>;

/// Steps the flow from (t0, y0) to t1, calling observer for every accepted
/// step. Fixed mode uses classical RK4; adaptive mode the Dormand-Prince 5(4)
/// pair with a max-norm error test against abs_tol + rel_tol * |y|.
///
/// Errors: budget (more than max_steps steps), stiffness (adaptive step
/// below h_min), divergence (non-finite state or norm > kDivergenceNorm).
StepStats integrate_steps(const SystemSpec& system, const StateVec& y0, double t0, double t1,
                          const IntegratorConfig& cfg, const StepObserver& observer);

Trajectory integrate(const SystemSpec& system, const StateVec& y0, double t0, double t1,
                     const IntegratorConfig& cfg);

/// Endpoint of the flow only, without storing samples. A zero-length span
/// returns y0.
StateVec advance(const SystemSpec& system, const StateVec& y0, double t0, double t1,
                 const IntegratorConfig& cfg);

StateVec sample_dense(const Trajectory& trajectory, double t);

/// ||Phi(t + tau, y0) - Phi(t, Phi(tau, y0))||, a semigroup self-test.
double flow_property_check(const SystemSpec& system, const StateVec& y0, double t, double tau,
                           const IntegratorConfig& cfg);

/// CSV with header t,x1[,x2[,x3]] and one row per sample.
std::string trajectory_csv(const Trajectory& trajectory);

}  // namespace omega_limit
