#include <cmath>
#include <random>

#include "doctest.h"
#include "omega_limit/integrate.hpp"
#include "omega_limit/invariance.hpp"
#include "support/expect.hpp"
#include "support/oracles.hpp"

using namespace omega_limit;

namespace {

// Hand-expanded bracket at sigma = 10, b = 8/3, r = 28.
double expanded_form(double x, double y, double z) {
  return -(16.0 / 3.0) * (z * z - 38.0 * z + 3.0 / 8.0 * (10.0 * x * x + y * y));
}

}  // namespace

TEST_CASE("lyap_value") {
  const LorenzParams p;
  CHECK(lyap_value(StateVec{0, 0, 38}, p) == 0.0);
  CHECK(lyap_value(StateVec{0, 0, 0}, p) == 1444.0);
  CHECK(lyap_value(StateVec{3, 4, 38}, p) == 25.0);
  CHECK(error_kind([&] { lyap_value(StateVec{1.0, 2.0}, p); }) == ErrorKind::invalid_input);
}

TEST_CASE("lyap_derivative point values") {
  const LorenzParams p;
  CHECK(lyap_derivative(StateVec{0, 0, 0}, p) == 0.0);
  CHECK(lyap_derivative(StateVec{0, 0, 0}, LorenzParams::with_r(3.0)) == 0.0);
  CHECK(lyap_derivative(StateVec{0, 0, 38}, p) == doctest::Approx(0.0));
  // -(16/3)(1 - 38 + (3/8)(11)) = 175.333...
  CHECK(lyap_derivative(StateVec{1, 1, 1}, p) == doctest::Approx(16.0 / 3.0 * 32.875).epsilon(1e-14));
}

TEST_CASE("both derivative routes agree and reduce to the expanded form at r = 28") {
  std::mt19937_64 rng(4242);
  for (double r : {1.0, 10.0, 28.0}) {
    const LorenzParams p = LorenzParams::with_r(r);
    for (int i = 0; i < 10000; ++i) {
      const StateVec s = oracles::random_state(rng, 3, 100.0);
      const double a = lyap_derivative_closed_form(s, p);
      const double b = lyap_derivative_chain_rule(s, p);
      CHECK(std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1.0}));
      if (r == 28.0) CHECK(std::abs(a - expanded_form(s[0], s[1], s[2])) <= 1e-9 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST_CASE("zero-set ellipsoid") {
  const EllipsoidSpec e = zero_set_ellipsoid(LorenzParams{});
  CHECK(e.center == StateVec{0, 0, 19});
  CHECK(std::abs(e.semiaxes[0] - std::sqrt(2888.0 / 30.0)) <= 1e-12);
  CHECK(std::abs(e.semiaxes[1] - std::sqrt(2888.0 / 3.0)) <= 1e-12);
  CHECK(std::abs(e.semiaxes[2] - 19.0) <= 1e-12);
  CHECK(e.semiaxes[0] == doctest::Approx(9.8107).epsilon(1e-4));
  CHECK(e.semiaxes[1] == doctest::Approx(31.0269).epsilon(1e-4));

  CHECK(lyap_derivative(e.center, LorenzParams{}) > 0.0);
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const StateVec s = e.surface_point(M_PI * i / 20, 2 * M_PI * j / 20);
      CHECK(std::abs(lyap_derivative(s, LorenzParams{})) <= 1e-6 * 1444.0);
    }
  }
}

TEST_CASE("derivative sign matches ellipsoid membership") {
  std::mt19937_64 rng(17);
  for (double r : {5.0, 28.0}) {
    const LorenzParams p = LorenzParams::with_r(r);
    const EllipsoidSpec e = zero_set_ellipsoid(p);
    for (int i = 0; i < 10000; ++i) {
      StateVec s = oracles::random_state(rng, 3, 40.0);
      s[2] += 20.0;
      const double lvl = e.level(s);
      if (std::abs(lvl - 1.0) < 1e-9) continue;
      CHECK((lyap_derivative(s, p) > 0.0) == e.contains_strictly(s));
    }
  }
}

TEST_CASE("min enclosing radius against the x = 0 slice oracle") {
  // On x = 0 the ellipsoid is y^2 = B^2 (1 - s^2), z = 19 + 19 s; maximize
  // the squared distance to (0, 0, 38) over s.
  const double big = 8.0 / 3.0 * 361.0;
  auto slice = [&](double s) { return big * (1.0 - s * s) + 361.0 * (s - 1.0) * (s - 1.0); };
  const double s_star = oracles::golden_max(slice, -1.0, 1.0);
  CHECK(s_star == doctest::Approx(-0.6).epsilon(1e-8));
  const double oracle = std::sqrt(slice(s_star));
  CHECK(oracle == doctest::Approx(39.246).epsilon(1e-4));

  const double c = min_enclosing_c(LorenzParams{}, 128);
  CHECK(std::abs(c - oracle) <= 1e-8);
  CHECK(c < 40.0);
  CHECK(std::abs(min_enclosing_c(LorenzParams{}, 256) - c) <= 1e-6);
  CHECK(error_kind([] { min_enclosing_c(LorenzParams{}, 32); }) == ErrorKind::invalid_input);
}

TEST_CASE("verify_trapping verdicts") {
  const LorenzParams p;
  SUBCASE("c = 45 is invariant") {
    const TrappingReport rep = verify_trapping(45.0, p, 200000, 1);
    CHECK(rep.verdict == TrappingVerdict::invariant);
    CHECK(rep.max_derivative < 0.0);
    CHECK(rep.c_min_enclosing < 45.0);
    // Pole spot check: (0, 0, 83).
    CHECK(lyap_derivative(StateVec{0, 0, 83}, p) == doctest::Approx(-(16.0 / 3.0) * (83.0 * 83.0 - 38.0 * 83.0)));
    CHECK(lyap_derivative(StateVec{0, 0, 83}, p) < 0.0);
  }
  SUBCASE("c = 30 is violated near the south pole") {
    const TrappingReport rep = verify_trapping(30.0, p, 20000, 1);
    CHECK(rep.verdict == TrappingVerdict::violated);
    CHECK(distance(rep.worst_point, StateVec{0, 0, 8}) < 0.5);
    const EllipsoidSpec e = zero_set_ellipsoid(p);
    CHECK(e.contains_strictly(StateVec{0, 0, 8}));
  }
  SUBCASE("tangency is inconclusive") {
    const double c = min_enclosing_c(p) + 1e-6;
    CHECK(verify_trapping(c, p, 20000, 1).verdict == TrappingVerdict::inconclusive);
  }
  SUBCASE("larger spheres are more strongly inward") {
    const double m1 = verify_trapping(42.0, p, 20000, 5).max_derivative;
    const double m2 = verify_trapping(48.0, p, 20000, 5).max_derivative;
    CHECK(m2 < m1);
    CHECK(m1 < 0.0);
  }
  SUBCASE("same seed is reproducible, argument checks") {
    const TrappingReport a = verify_trapping(45.0, p, 5000, 9);
    const TrappingReport b = verify_trapping(45.0, p, 5000, 9);
    CHECK(a.max_derivative == b.max_derivative);
    CHECK(a.worst_point == b.worst_point);
    CHECK(error_kind([&] { verify_trapping(45.0, p, 999, 1); }) == ErrorKind::invalid_input);
    CHECK(error_kind([&] { verify_trapping(-1.0, p, 5000, 1); }) == ErrorKind::invalid_input);
  }
}

TEST_CASE("fibonacci lattice lies on the sphere") {
  const auto pts = fibonacci_sphere(1000, StateVec{0, 0, 38}, 45.0, 3);
  for (const auto& q : pts) CHECK(distance(q, StateVec{0, 0, 38}) == doctest::Approx(45.0).epsilon(1e-12));
}

TEST_CASE("trajectories started on the c = 45 sphere stay inside") {
  const LorenzParams p;
  const SystemSpec sys = lorenz(p);
  const auto starts = fibonacci_sphere(100, StateVec{0, 0, 38}, 45.0, 11);
  for (const auto& s : starts) {
    const Trajectory tr = integrate(sys, s, 0.0, 5.0, IntegratorConfig{});
    double worst = 0.0;
    for (std::size_t seg = 0; seg < tr.segment_count(); ++seg) {
      for (int k = 0; k <= 4; ++k) {
        const double t = tr.time(seg) + (tr.time(seg + 1) - tr.time(seg)) * k / 4.0;
        worst = std::max(worst, lyap_value(tr.at(t), p));
      }
    }
    CHECK(worst <= 45.0 * 45.0 + 1e-6);
  }
}

TEST_CASE("ellipsoid mesh CSV") {
  const std::string csv = ellipsoid_mesh_csv(zero_set_ellipsoid(LorenzParams{}), 10, 12);
  CHECK(csv.rfind("x,y,z\n", 0) == 0);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 1 + 11 * 12);
}
