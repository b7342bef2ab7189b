#pragma once

#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "omega_limit/state.hpp"
#include "omega_limit/systems.hpp"

namespace omega_limit {

using Complex = std::complex<double>;

/// |Re(lambda)| at or below this counts as a zero real part.
inline constexpr double kMarginalThreshold = 1e-8;

enum class Stability { stable_node, stable_focus, unstable, saddle, saddle_focus, marginal };

std::string_view to_string(Stability s);

struct EquilibriumReport {
  StateVec location;
  double residual = 0.0;  // ||f(location)||
  std::vector<Complex> eigenvalues;
  Stability classification = Stability::marginal;
  int stable_dimension = 0;    // eigenvalues with Re < -threshold
  int unstable_dimension = 0;  // eigenvalues with Re > threshold
  int iterations = 0;
};

/// Damped Newton iteration on f(y) = 0 from `guess` until ||f|| <= tol.
///
/// The full step is halved up to 20 times while the residual fails to
/// decrease. A singular Jacobian falls back to a regularized least-squares
/// step before raising Error(singularity). More than 50 iterations raise
/// Error(convergence).
EquilibriumReport find_equilibrium(const SystemSpec& system, const StateVec& guess, double tol = 1e-12);

/// Origin, then A and B (x < 0 and x > 0) when r > 1.
std::vector<EquilibriumReport> lorenz_equilibria(const LorenzParams& params);

/// Roots of the characteristic polynomial of a 3x3 matrix, from the cubic
/// formula followed by one Newton polish per root. Sorted by real part,
/// then imaginary part.
std::vector<Complex> eigen3(const Matrix& m);

/// Eigenvalues for n = 1, 2, 3 via closed forms.
std::vector<Complex> eigenvalues(const Matrix& m);

/// det(M - lambda I), for residual checks.
Complex characteristic_determinant(const Matrix& m, Complex lambda);

Stability classify(std::span<const Complex> eigenvalues);
double max_real_part(std::span<const Complex> eigenvalues);

/// Locates the loss of stability of B by bisection on max Re(eig J(B(r)))
/// until the bracket is narrower than tol. Throws Error(bracket) when the
/// endpoints do not straddle zero.
double hopf_threshold(double r_lo, double r_hi, double tol, double sigma = 10.0, double b = 8.0 / 3.0);

/// sigma (sigma + b + 3) / (sigma - b - 1), the closed-form stability boundary.
double hopf_threshold_analytic(double sigma = 10.0, double b = 8.0 / 3.0);

struct BifurcationRow {
  double r;
  int n_equilibria;
  double max_re_origin;
  double max_re_b;  // NaN when B does not exist (r <= 1)
};

struct BifurcationScan {
  std::string parameter = "r";
  std::vector<BifurcationRow> rows;
  std::vector<double> pitchfork_thresholds;  // origin max Re changes sign
  std::vector<double> hopf_thresholds;       // max Re at B changes sign
};

/// Equilibrium count and leading real parts over a strictly increasing r
/// grid; sign changes between neighbouring grid points are refined by
/// bisection to 1e-10.
BifurcationScan pitchfork_scan(std::span<const double> r_values, double sigma = 10.0, double b = 8.0 / 3.0);

/// CSV with header r,n_equilibria,max_re_origin,max_re_B.
std::string bifurcation_csv(const BifurcationScan& scan);

}  // namespace omega_limit
