#include "omega_limit/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "omega_limit/error.hpp"
#include "omega_limit/io.hpp"

namespace omega_limit {

void IntegratorConfig::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (mode == StepMode::fixed && !positive(h)) {
    throw Error(ErrorKind::validation, "fixed step h must be > 0");
  }
  if (!positive(rel_tol) || !positive(abs_tol)) {
    throw Error(ErrorKind::validation, "rel_tol and abs_tol must be > 0");
  }
  if (!positive(h_min) || !positive(h_max) || h_min > h_max) {
    throw Error(ErrorKind::validation, "step bounds require 0 < h_min <= h_max");
  }
  if (max_steps == 0) throw Error(ErrorKind::validation, "max_steps must be > 0");
}

IntegratorConfig IntegratorConfig::fixed_step(double h) {
  IntegratorConfig cfg;
  cfg.mode = StepMode::fixed;
  cfg.h = h;
  return cfg;
}

IntegratorConfig IntegratorConfig::adaptive(double rel_tol, double abs_tol) {
  IntegratorConfig cfg;
  cfg.rel_tol = rel_tol;
  cfg.abs_tol = abs_tol;
  return cfg;
}

StateVec hermite_state(const StepView& step, double t) {
  const double h = step.t_end - step.t_start;
  const double s = (t - step.t_start) / h;
  const double u = 1.0 - s;
  const double h00 = (1.0 + 2.0 * s) * u * u;
  const double h10 = s * u * u * h;
  const double h01 = s * s * (3.0 - 2.0 * s);
  const double h11 = -s * s * u * h;
  StateVec out = StateVec::zeros(step.y_start.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = h00 * step.y_start[i] + h10 * step.f_start[i] + h01 * step.y_end[i] + h11 * step.f_end[i];
  }
  return out;
}

StateVec hermite_derivative(const StepView& step, double t) {
  const double h = step.t_end - step.t_start;
  const double s = (t - step.t_start) / h;
  const double d00 = (6.0 * s * s - 6.0 * s) / h;
  const double d10 = 3.0 * s * s - 4.0 * s + 1.0;
  const double d01 = -d00;
  const double d11 = 3.0 * s * s - 2.0 * s;
  StateVec out = StateVec::zeros(step.y_start.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = d00 * step.y_start[i] + d10 * step.f_start[i] + d01 * step.y_end[i] + d11 * step.f_end[i];
  }
  return out;
}

StepView Trajectory::segment(std::size_t i) const {
  return StepView{times_[i], states_[i], derivatives_[i], times_[i + 1], states_[i + 1], derivatives_[i + 1]};
}

std::size_t Trajectory::segment_index(double t) const {
  if (times_.size() < 2 || !(t >= times_.front() && t <= times_.back())) {
    throw Error(ErrorKind::range, "time " + format_double(t) + " outside trajectory span");
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t idx = static_cast<std::size_t>(it - times_.begin());
  return std::min(idx == 0 ? 0 : idx - 1, times_.size() - 2);
}

StateVec Trajectory::at(double t) const {
  const std::size_t seg = segment_index(t);
  if (t == times_[seg]) return states_[seg];
  if (t == times_[seg + 1]) return states_[seg + 1];
  return hermite_state(segment(seg), t);
}

StateVec Trajectory::derivative_at(double t) const {
  const std::size_t seg = segment_index(t);
  if (t == times_[seg]) return derivatives_[seg];
  if (t == times_[seg + 1]) return derivatives_[seg + 1];
  return hermite_derivative(segment(seg), t);
}

void Trajectory::append(double t, const StateVec& y, const StateVec& f) {
  if (!times_.empty() && !(t > times_.back())) {
    throw Error(ErrorKind::invalid_input, "trajectory times must be strictly increasing");
  }
  times_.push_back(t);
  states_.push_back(y);
  derivatives_.push_back(f);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

StateVec combine(const StateVec& y, double h, std::initializer_list<std::pair<double, const StateVec*>> terms) {
  StateVec out = y;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double s = 0.0;
    for (const auto& [coef, k] : terms) s += coef * (*k)[i];
    out[i] += h * s;
  }
  return out;
}

void check_diverged(const StateVec& y, double last_good_time) {
  if (!y.is_finite() || y.norm() > kDivergenceNorm) {
    throw DivergenceError("integration diverged after t=" + format_double(last_good_time), last_good_time);
  }
}

double rms_scaled(const StateVec& v, const StateVec& y, const IntegratorConfig& cfg) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
    s += (v[i] / sc) * (v[i] / sc);
  }
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Starting step heuristic from Hairer, Norsett & Wanner, order 5.
double initial_step(const SystemSpec& system, const StateVec& y0, const StateVec& f0, double span,
                    const IntegratorConfig& cfg) {
  const double d0 = rms_scaled(y0, y0, cfg);
  const double d1 = rms_scaled(f0, y0, cfg);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const StateVec y1 = y0 + h0 * f0;
  const StateVec f1 = system.rhs(y1);
  const double d2 = rms_scaled(f1 - f0, y0, cfg) / h0;
  const double m = std::max(d1, d2);
  const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 1.0 / 5.0);
  return std::clamp(std::min(100.0 * h0, h1), cfg.h_min, std::min(cfg.h_max, span));
}

StepStats run_fixed(const SystemSpec& system, const StateVec& y0, double t0, double t1,
                    const IntegratorConfig& cfg, const StepObserver& observer) {
  StepStats stats;
  const double span = t1 - t0;
  const auto n = static_cast<std::size_t>(std::ceil(span / cfg.h * (1.0 - 1e-12)));
  if (n > cfg.max_steps) {
    throw Error(ErrorKind::budget, "fixed-step run needs " + std::to_string(n) + " steps, budget " +
                                       std::to_string(cfg.max_steps));
  }
  StateVec y = y0;
  StateVec f = system.rhs(y);
  double t = t0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t_next = k == n ? t1 : t0 + static_cast<double>(k) * cfg.h;
    const double h = t_next - t;
    const StateVec k1 = f;
    const StateVec k2 = system.rhs(y + (0.5 * h) * k1);
    const StateVec k3 = system.rhs(y + (0.5 * h) * k2);
    const StateVec k4 = system.rhs(y + h * k3);
    StateVec y_next = combine(y, h, {{1.0 / 6, &k1}, {1.0 / 3, &k2}, {1.0 / 3, &k3}, {1.0 / 6, &k4}});
    check_diverged(y_next, t);
    StateVec f_next = system.rhs(y_next);
    observer(StepView{t, y, f, t_next, y_next, f_next});
    ++stats.accepted;
    stats.min_step = std::min(stats.min_step, h);
    stats.max_step = std::max(stats.max_step, h);
    y = std::move(y_next);
    f = std::move(f_next);
    t = t_next;
  }
  return stats;
}

StepStats run_adaptive(const SystemSpec& system, const StateVec& y0, double t0, double t1,
                       const IntegratorConfig& cfg, const StepObserver& observer) {
  StepStats stats;
  StateVec y = y0;
  StateVec k1 = system.rhs(y);
  double t = t0;
  double h = initial_step(system, y, k1, t1 - t0, cfg);
  bool last_rejected = false;
  std::size_t attempts = 0;

  while (t < t1) {
    if (++attempts > 2 * cfg.max_steps || stats.accepted >= cfg.max_steps) {
      throw Error(ErrorKind::budget, "step budget of " + std::to_string(cfg.max_steps) +
                                         " exhausted at t=" + format_double(t));
    }
    if (h < cfg.h_min && t1 - t > cfg.h_min) {
      throw Error(ErrorKind::stiffness, "step size fell below h_min=" + format_double(cfg.h_min) +
                                            " at t=" + format_double(t));
    }
    bool final_step = false;
    if (t + h >= t1) {
      h = t1 - t;
      final_step = true;
    }
    const StateVec k2 = system.rhs(combine(y, h, {{a21, &k1}}));
    const StateVec k3 = system.rhs(combine(y, h, {{a31, &k1}, {a32, &k2}}));
    const StateVec k4 = system.rhs(combine(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const StateVec k5 = system.rhs(combine(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const StateVec k6 =
        system.rhs(combine(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    StateVec y_next = combine(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    StateVec k7 = system.rhs(y_next);

    // A trial step that overflows is rejected like any other oversized step;
    // divergence is only declared on accepted states.
    double err = y_next.is_finite() && k7.is_finite() ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < y.size() && std::isfinite(err); ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_next[i]));
      err = std::max(err, std::abs(e) / sc);
    }

    if (err <= 1.0) {
      check_diverged(y_next, t);
      const double t_next = final_step ? t1 : t + h;
      observer(StepView{t, y, k1, t_next, y_next, k7});
      ++stats.accepted;
      stats.min_step = std::min(stats.min_step, h);
      stats.max_step = std::max(stats.max_step, h);
      t = t_next;
      y = std::move(y_next);
      k1 = std::move(k7);
      double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (last_rejected) grow = std::min(grow, 1.0);
      h = std::min(h * grow, cfg.h_max);
      last_rejected = false;
    } else {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
    }
  }
  return stats;
}

}  // namespace

StepStats integrate_steps(const SystemSpec& system, const StateVec& y0, double t0, double t1,
                          const IntegratorConfig& cfg, const StepObserver& observer) {
  cfg.validate();
  if (y0.size() != system.dimension()) {
    throw Error(ErrorKind::invalid_input, "initial state dimension does not match system " + system.name());
  }
  if (!y0.is_finite()) throw Error(ErrorKind::invalid_input, "initial state is not finite");
  if (!(std::isfinite(t0) && std::isfinite(t1) && t1 > t0)) {
    throw Error(ErrorKind::invalid_input, "integration requires finite t1 > t0");
  }
  return cfg.mode == StepMode::fixed ? run_fixed(system, y0, t0, t1, cfg, observer)
                                     : run_adaptive(system, y0, t0, t1, cfg, observer);
}

Trajectory integrate(const SystemSpec& system, const StateVec& y0, double t0, double t1,
                     const IntegratorConfig& cfg) {
  Trajectory traj(system.dimension());
  bool first = true;
  const StepStats stats = integrate_steps(system, y0, t0, t1, cfg, [&](const StepView& step) {
    if (first) {
      traj.append(step.t_start, step.y_start, step.f_start);
      first = false;
    }
    traj.append(step.t_end, step.y_end, step.f_end);
  });
  traj.set_stats(stats);
  return traj;
}

StateVec advance(const SystemSpec& system, const StateVec& y0, double t0, double t1,
                 const IntegratorConfig& cfg) {
  if (t1 == t0) return y0;
  StateVec last = y0;
  integrate_steps(system, y0, t0, t1, cfg, [&](const StepView& step) { last = step.y_end; });
  return last;
}

StateVec sample_dense(const Trajectory& trajectory, double t) { return trajectory.at(t); }

double flow_property_check(const SystemSpec& system, const StateVec& y0, double t, double tau,
                           const IntegratorConfig& cfg) {
  if (!(t > 0.0) || !(tau >= 0.0)) {
    throw Error(ErrorKind::invalid_input, "flow check requires t > 0 and tau >= 0");
  }
  const StateVec direct = advance(system, y0, 0.0, t + tau, cfg);
  const StateVec mid = advance(system, y0, 0.0, tau, cfg);
  const StateVec composed = advance(system, mid, 0.0, t, cfg);
  return distance(direct, composed);
}

std::string trajectory_csv(const Trajectory& trajectory) {
  std::vector<std::string> header{"t"};
  for (std::size_t i = 1; i <= trajectory.dimension(); ++i) header.push_back("x" + std::to_string(i));
  CsvWriter csv(std::move(header));
  std::vector<double> row(trajectory.dimension() + 1);
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    row[0] = trajectory.time(i);
    const auto& s = trajectory.state(i);
    std::copy(s.begin(), s.end(), row.begin() + 1);
    csv.row(row);
  }
  return csv.str();
}

}  // namespace omega_limit
