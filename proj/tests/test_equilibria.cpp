#include <cmath>
#include <random>

#include "doctest.h"
#include "omega_limit/equilibria.hpp"
#include "support/expect.hpp"
#include "support/oracles.hpp"

using namespace omega_limit;

namespace {

// Roots of lambda^2 + p lambda + q by the textbook formula.
std::pair<double, double> quadratic_oracle(double p, double q) {
  const double d = std::sqrt(p * p - 4.0 * q);
  return {(-p - d) / 2.0, (-p + d) / 2.0};
}

double det_residual_bound(const Matrix& m) {
  const double n = m.max_abs_entry();
  return 1e-6 * (1.0 + n * n * n);
}

}  // namespace

TEST_CASE("find_equilibrium converges to B at r = 28") {
  const EquilibriumReport rep = find_equilibrium(builtin("lorenz"), StateVec{8, 8, 27});
  const double w = std::sqrt(72.0);
  CHECK(std::abs(rep.location[0] - w) <= 1e-9);
  CHECK(std::abs(rep.location[1] - w) <= 1e-9);
  CHECK(std::abs(rep.location[2] - 27.0) <= 1e-9);
  CHECK(rep.residual <= 1e-10);
  CHECK(rep.eigenvalues.size() == 3);
  CHECK(rep.classification == Stability::saddle_focus);
}

TEST_CASE("find_equilibrium small cases") {
  const EquilibriumReport origin = find_equilibrium(builtin("lorenz", {{"r", 0.5}}), StateVec{0.1, 0.1, 0.1});
  CHECK(origin.location.norm() <= 1e-10);
  CHECK(origin.classification == Stability::stable_node);
  CHECK(origin.stable_dimension == 3);

  // f'(3) = -(3-1)(3-2)(4-3)(5-3) = -4 by the product rule.
  const EquilibriumReport three = find_equilibrium(builtin("quintic1d"), StateVec{2.9});
  CHECK(three.location[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(three.eigenvalues.front().real() == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK(three.classification == Stability::stable_node);
}

TEST_CASE("find_equilibrium error paths") {
  // No real root: f(y) = y^2 + 1 never vanishes, Newton wanders.
  const SystemSpec no_root("no_root", 1, {}, [](const StateVec& y) { return StateVec{y[0] * y[0] + 1.0}; },
                           [](const StateVec& y) { return Matrix(1, {2.0 * y[0]}); });
  const ErrorKind k = error_kind([&] { find_equilibrium(no_root, StateVec{0.5}); });
  CHECK((k == ErrorKind::convergence || k == ErrorKind::singularity));

  // Identically singular Jacobian with a non-zero residual.
  const SystemSpec flat("flat", 1, {}, [](const StateVec&) { return StateVec{1.0}; },
                        [](const StateVec&) { return Matrix(1, {0.0}); });
  CHECK(error_kind([&] { find_equilibrium(flat, StateVec{0.0}); }) == ErrorKind::singularity);
  CHECK(error_kind([&] { find_equilibrium(builtin("lorenz"), StateVec{1.0}); }) == ErrorKind::invalid_input);
}

TEST_CASE("damped Newton handles the near-singular pitchfork") {
  const SystemSpec sys = builtin("lorenz", {{"r", 1.0 + 1e-6}});
  const EquilibriumReport rep = find_equilibrium(sys, StateVec{0.5, 0.5, 0.2});
  CHECK(rep.residual <= 1e-12);
}

TEST_CASE("lorenz_equilibria") {
  CHECK(lorenz_equilibria(LorenzParams::with_r(0.5)).size() == 1);
  CHECK(lorenz_equilibria(LorenzParams::with_r(1.0)).size() == 1);

  const auto eq = lorenz_equilibria(LorenzParams::with_r(28.0));
  REQUIRE(eq.size() == 3);
  const double w = std::sqrt(72.0);
  CHECK(max_abs_difference(eq[1].location, StateVec{-w, -w, 27}) <= 1e-9);
  CHECK(max_abs_difference(eq[2].location, StateVec{w, w, 27}) <= 1e-9);
  CHECK(eq[0].classification == Stability::saddle);

  // Closed form and mirror symmetry over a range of r.
  for (double r = 1.05; r < 60.0; r *= 1.3) {
    const auto e = lorenz_equilibria(LorenzParams::with_r(r));
    const double s = std::sqrt(8.0 / 3.0 * (r - 1.0));
    CHECK(max_abs_difference(e[2].location, StateVec{s, s, r - 1.0}) <= 1e-9);
    CHECK(max_abs_difference(e[1].location, StateVec{-e[2].location[0], -e[2].location[1], e[2].location[2]}) <= 1e-12);
    for (const auto& rep : e) CHECK(rep.residual <= 1e-10);
  }
}

TEST_CASE("eigen3 against independent oracles") {
  SUBCASE("diagonal") {
    const auto ev = eigen3(Matrix(3, {1, 0, 0, 0, 2, 0, 0, 0, 3}));
    CHECK(ev[0].real() == doctest::Approx(1.0));
    CHECK(ev[1].real() == doctest::Approx(2.0));
    CHECK(ev[2].real() == doctest::Approx(3.0));
  }
  SUBCASE("origin jacobian at r = 28 is block triangular") {
    const auto ev = eigen3(builtin("lorenz").jac(StateVec{0, 0, 0}));
    const auto [lo, hi] = quadratic_oracle(11.0, -270.0);
    CHECK(std::abs(lo - (-11.0 - std::sqrt(1201.0)) / 2.0) <= 1e-12);
    CHECK(std::abs(ev[0].real() - lo) <= 1e-8);
    CHECK(std::abs(ev[1].real() + 8.0 / 3.0) <= 1e-8);
    CHECK(std::abs(ev[2].real() - hi) <= 1e-8);
    for (const auto& l : ev) CHECK(l.imag() == 0.0);
  }
  SUBCASE("B near the Hopf threshold has a near-imaginary pair") {
    const double r = 24.74, w = std::sqrt(8.0 / 3.0 * (r - 1.0));
    const auto ev = eigen3(builtin("lorenz", {{"r", r}}).jac(StateVec{w, w, r - 1.0}));
    CHECK(std::abs(ev[2].imag()) > 1.0);
    CHECK(std::abs(ev[2].real()) < 1e-3);
  }
  SUBCASE("random matrices satisfy the characteristic equation") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    for (int i = 0; i < 2000; ++i) {
      Matrix m(3);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m(r, c) = u(rng);
      }
      for (const auto& l : eigen3(m)) CHECK(std::abs(characteristic_determinant(m, l)) <= det_residual_bound(m));
    }
  }
  SUBCASE("repeated roots") {
    const Matrix m(3, {2, 1, 0, 0, 2, 0, 0, 0, 2});
    for (const auto& l : eigen3(m)) CHECK(std::abs(characteristic_determinant(m, l)) <= det_residual_bound(m));
  }
}

TEST_CASE("classify") {
  const std::vector<Complex> stable{-1.0, -2.0, -3.0};
  CHECK(classify(stable) == Stability::stable_node);
  const std::vector<Complex> saddle{-8.0 / 3.0, -22.8277, 11.8277};
  CHECK(classify(saddle) == Stability::saddle);
  const std::vector<Complex> marginal{-1e-12, -1.0};
  CHECK(classify(marginal) == Stability::marginal);
  const std::vector<Complex> focus{{-1.0, 2.0}, {-1.0, -2.0}, -5.0};
  CHECK(classify(focus) == Stability::stable_focus);
  const std::vector<Complex> sf{{0.1, 10.0}, {0.1, -10.0}, -13.8};
  CHECK(classify(sf) == Stability::saddle_focus);
  const std::vector<Complex> up{1.0, 2.0};
  CHECK(classify(up) == Stability::unstable);
  CHECK(error_kind([] { classify(std::vector<Complex>{}); }) == ErrorKind::invalid_input);
}

TEST_CASE("hopf threshold") {
  const double found = hopf_threshold(2.0, 30.0, 1e-6);
  CHECK(std::abs(found - 24.7368) <= 1e-4);
  CHECK(std::abs(found - 470.0 / 19.0) <= 1e-4);
  CHECK(hopf_threshold_analytic() == doctest::Approx(470.0 / 19.0).epsilon(1e-15));
  // Independent of the bracket.
  CHECK(std::abs(hopf_threshold(20.0, 100.0, 1e-6) - found) <= 2e-6);
  CHECK(std::abs(hopf_threshold(24.0, 25.0, 1e-6) - found) <= 2e-6);
  CHECK(error_kind([] { hopf_threshold(2.0, 10.0, 1e-6); }) == ErrorKind::bracket);
}

TEST_CASE("pitchfork scan") {
  const std::vector<double> grid{0.5, 0.9, 1.1, 1.5};
  const BifurcationScan scan = pitchfork_scan(grid);
  REQUIRE(scan.rows.size() == 4);
  CHECK(scan.rows[0].n_equilibria == 1);
  CHECK(scan.rows[1].n_equilibria == 1);
  CHECK(scan.rows[2].n_equilibria == 3);
  CHECK(scan.rows[3].n_equilibria == 3);
  CHECK(scan.rows[1].max_re_origin < 0.0);
  CHECK(scan.rows[2].max_re_origin > 0.0);
  CHECK(std::isnan(scan.rows[0].max_re_b));
  REQUIRE(scan.pitchfork_thresholds.size() == 1);
  CHECK(std::abs(scan.pitchfork_thresholds[0] - 1.0) <= 1e-9);
  CHECK(scan.hopf_thresholds.empty());

  // Exactly at r = 1: lambda^2 + 11 lambda + 10 (1 - r) = 0 has the root 0.
  const auto at_one = lorenz_equilibria(LorenzParams::with_r(1.0));
  CHECK(std::abs(max_real_part(at_one[0].eigenvalues)) <= 1e-8);

  const std::vector<double> wide{0.5, 1.0, 2.0, 10.0, 20.0, 24.0, 25.0, 30.0};
  const BifurcationScan full = pitchfork_scan(wide);
  REQUIRE(full.hopf_thresholds.size() == 1);
  CHECK(std::abs(full.hopf_thresholds[0] - 470.0 / 19.0) <= 1e-6);
  CHECK(full.pitchfork_thresholds.front() == 1.0);

  CHECK(error_kind([] { pitchfork_scan(std::vector<double>{1.0, 0.5}); }) == ErrorKind::validation);
  CHECK(bifurcation_csv(scan).rfind("r,n_equilibria,max_re_origin,max_re_B\n", 0) == 0);
}
