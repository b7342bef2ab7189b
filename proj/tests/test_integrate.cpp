#include <cmath>
#include <numbers>

#include "doctest.h"
#include "omega_limit/integrate.hpp"
#include "support/expect.hpp"

using namespace omega_limit;

namespace {

SystemSpec decay() {
  return SystemSpec("decay", 1, {}, [](const StateVec& y) { return StateVec{-y[0]}; },
                    [](const StateVec&) { return Matrix(1, {-1.0}); });
}

SystemSpec blowup() {
  return SystemSpec("blowup", 1, {}, [](const StateVec& y) { return StateVec{y[0] * y[0]}; },
                    [](const StateVec& y) { return Matrix(1, {2.0 * y[0]}); });
}

}  // namespace

TEST_CASE("adaptive integration of exponential decay") {
  const auto cfg = IntegratorConfig::adaptive(1e-10, 1e-10);
  const Trajectory tr = integrate(decay(), StateVec{1.0}, 0.0, 1.0, cfg);
  CHECK(std::abs(tr.state(tr.size() - 1)[0] - std::exp(-1.0)) <= 1e-9);
  CHECK(tr.t_end() == 1.0);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.time(i) > tr.time(i - 1));
  CHECK(tr.stats().accepted + 1 == tr.size());
}

TEST_CASE("RK4 global error ratio under step halving") {
  auto err = [](double h) {
    return std::abs(advance(decay(), StateVec{1.0}, 0.0, 1.0, IntegratorConfig::fixed_step(h))[0] - std::exp(-1.0));
  };
  const double ratio = err(0.1) / err(0.05);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("lorenz self-convergence against a tighter reference") {
  const SystemSpec sys = builtin("lorenz");
  const StateVec y0{5, 5, 5};
  const StateVec loose = advance(sys, y0, 0.0, 1.0, IntegratorConfig::adaptive(1e-10, 1e-12));
  const StateVec tight = advance(sys, y0, 0.0, 1.0, IntegratorConfig::adaptive(1e-13, 1e-15));
  CHECK(max_abs_difference(loose, tight) <= 1e-6);
}

TEST_CASE("lorenz below the pitchfork decays to the origin") {
  const StateVec end = advance(builtin("lorenz", {{"r", 0.5}}), StateVec{1, 1, 1}, 0.0, 100.0, IntegratorConfig{});
  CHECK(end.norm() <= 1e-6);
}

TEST_CASE("flow semigroup property") {
  CHECK(flow_property_check(decay(), StateVec{1.0}, 1.0, 1.0, IntegratorConfig::adaptive(1e-10, 1e-10)) <= 1e-9);
  CHECK(flow_property_check(builtin("lorenz"), StateVec{5, 5, 5}, 0.5, 0.5, IntegratorConfig::adaptive(1e-12, 1e-12)) <=
        1e-6);
  CHECK(flow_property_check(builtin("lorenz"), StateVec{5, 5, 5}, 0.7, 0.0, IntegratorConfig{}) == 0.0);
}

TEST_CASE("dense output") {
  const Trajectory tr = integrate(decay(), StateVec{1.0}, 0.0, 3.0, IntegratorConfig::adaptive(1e-8, 1e-8));

  SUBCASE("sample times reproduce samples exactly") {
    for (std::size_t i = 0; i < tr.size(); ++i) CHECK(sample_dense(tr, tr.time(i)) == tr.state(i));
    for (std::size_t s = 0; s < tr.segment_count(); ++s) {
      const StepView seg = tr.segment(s);
      CHECK(std::abs(hermite_state(seg, seg.t_end)[0] - seg.y_end[0]) <= 1e-12 * std::abs(seg.y_end[0]));
      CHECK(std::abs(hermite_state(seg, seg.t_start)[0] - seg.y_start[0]) <= 1e-12 * std::abs(seg.y_start[0]));
    }
  }
  SUBCASE("midpoints track the exact solution") {
    for (std::size_t s = 0; s < tr.segment_count(); ++s) {
      const double t = 0.5 * (tr.time(s) + tr.time(s + 1));
      CHECK(std::abs(sample_dense(tr, t)[0] - std::exp(-t)) <= 1e-6);
    }
  }
  SUBCASE("monotone solution gives a monotone interpolant") {
    for (std::size_t s = 0; s < tr.segment_count(); ++s) {
      double prev = tr.state(s)[0];
      for (int k = 1; k <= 50; ++k) {
        const double t = tr.time(s) + (tr.time(s + 1) - tr.time(s)) * k / 50.0;
        const double v = sample_dense(tr, t)[0];
        CHECK(v <= prev);
        prev = v;
      }
    }
  }
  SUBCASE("outside the span is a range error") {
    CHECK(error_kind([&] { sample_dense(tr, -0.1); }) == ErrorKind::range);
    CHECK(error_kind([&] { sample_dense(tr, 3.0001); }) == ErrorKind::range);
  }
}

TEST_CASE("lorenz mirror trajectories") {
  const SystemSpec sys = builtin("lorenz");
  const auto cfg = IntegratorConfig::adaptive(1e-12, 1e-12);
  const Trajectory a = integrate(sys, StateVec{3, -2, 17}, 0.0, 5.0, cfg);
  const Trajectory b = integrate(sys, StateVec{-3, 2, 17}, 0.0, 5.0, cfg);
  for (double t = 0.0; t <= 5.0; t += 0.01) {
    const StateVec pa = a.at(t), pb = b.at(t);
    CHECK(max_abs_difference(pa, StateVec{-pb[0], -pb[1], pb[2]}) <= 1e-9);
  }
}

TEST_CASE("adaptive steps respect the local error tolerance") {
  // The embedded estimate is only a proxy; compare each accepted step with a
  // much tighter single-step reference.
  const SystemSpec sys = builtin("vanderpol");
  const auto cfg = IntegratorConfig::adaptive(1e-6, 1e-8);
  const Trajectory tr = integrate(sys, StateVec{2.0, 0.0}, 0.0, 10.0, cfg);
  const auto tight = IntegratorConfig::adaptive(1e-13, 1e-14);
  std::size_t within = 0;
  for (std::size_t s = 0; s < tr.segment_count(); ++s) {
    const StateVec ref = advance(sys, tr.state(s), tr.time(s), tr.time(s + 1), tight);
    bool ok = true;
    for (std::size_t i = 0; i < 2; ++i) {
      ok = ok && std::abs(ref[i] - tr.state(s + 1)[i]) <= 10.0 * (cfg.abs_tol + cfg.rel_tol * std::abs(ref[i]));
    }
    within += ok ? 1 : 0;
  }
  CHECK(within == tr.segment_count());
}

TEST_CASE("integrator error paths") {
  SUBCASE("budget") {
    auto cfg = IntegratorConfig{};
    cfg.max_steps = 10;
    CHECK(error_kind([&] { integrate(builtin("lorenz"), StateVec{5, 5, 5}, 0.0, 10.0, cfg); }) == ErrorKind::budget);
    CHECK(error_kind([&] { integrate(decay(), StateVec{1.0}, 0.0, 10.0, [] {
            auto c = IntegratorConfig::fixed_step(0.1);
            c.max_steps = 5;
            return c;
          }()); }) == ErrorKind::budget);
  }
  SUBCASE("divergence carries the last good time") {
    try {
      integrate(blowup(), StateVec{1.0}, 0.0, 2.0, IntegratorConfig::fixed_step(0.01));
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.kind() == ErrorKind::divergence);
      CHECK(e.last_good_time() > 0.9);
      CHECK(e.last_good_time() < 2.0);
    }
    try {
      integrate(blowup(), StateVec{1.0}, 0.0, 2.0, {});
      FAIL("expected divergence");
    } catch (const DivergenceError& e) {
      CHECK(e.last_good_time() == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  SUBCASE("stiffness on step underflow") {
    auto cfg = IntegratorConfig::adaptive(1e-12, 1e-12);
    cfg.h_min = 1e-3;
    CHECK(error_kind([&] { integrate(blowup(), StateVec{1.0}, 0.0, 2.0, cfg); }) == ErrorKind::stiffness);
  }
  SUBCASE("invalid inputs") {
    CHECK(error_kind([] { integrate(decay(), StateVec{1.0}, 1.0, 1.0, IntegratorConfig{}); }) == ErrorKind::invalid_input);
    CHECK(error_kind([] { integrate(decay(), StateVec{1.0, 2.0}, 0.0, 1.0, IntegratorConfig{}); }) ==
          ErrorKind::invalid_input);
    auto bad = IntegratorConfig{};
    bad.h_min = 2.0;
    CHECK(error_kind([&] { integrate(decay(), StateVec{1.0}, 0.0, 1.0, bad); }) == ErrorKind::validation);
  }
}

TEST_CASE("trajectory CSV") {
  const Trajectory tr = integrate(builtin("vanderpol"), StateVec{1.0, 0.0}, 0.0, 1.0, IntegratorConfig{});
  const std::string csv = trajectory_csv(tr);
  CHECK(csv.rfind("t,x1,x2\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == tr.size() + 1);
}
