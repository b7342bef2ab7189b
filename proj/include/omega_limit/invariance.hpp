#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "omega_limit/state.hpp"
#include "omega_limit/systems.hpp"

namespace omega_limit {

// Lyapunov-sphere trapping construction for the Lorenz flow:
//   c^2 = x^2 + y^2 + (z - (sigma + r))^2
// and its derivative along the flow
//   d(c^2)/dt = -2 sigma x^2 - 2 y^2 - 2 b z^2 + 2 b (sigma + r) z.

double lyap_value(const StateVec& state, const LorenzParams& params);

double lyap_derivative_chain_rule(const StateVec& state, const LorenzParams& params);
double lyap_derivative_closed_form(const StateVec& state, const LorenzParams& params);

/// d(c^2)/dt from the closed form, after checking it against the chain rule
/// through the vector field. Disagreement beyond 1e-9 relative raises
/// Error(consistency).
double lyap_derivative(const StateVec& state, const LorenzParams& params);

/// Axis-aligned ellipsoid sum ((p_i - center_i) / semiaxis_i)^2 = 1.
struct EllipsoidSpec {
  StateVec center;
  std::array<double, 3> semiaxes{};

  /// sum ((p_i - center_i) / a_i)^2; < 1 strictly inside.
  double level(const StateVec& p) const;
  bool contains_strictly(const StateVec& p) const { return level(p) < 1.0; }

  /// theta in [0, pi] from the +z pole, phi in [0, 2 pi).
  StateVec surface_point(double theta, double phi) const;
};

/// The surface where d(c^2)/dt = 0: center (0, 0, (sigma+r)/2), semiaxes
/// (sqrt(b (sigma+r)^2 / (4 sigma)), sqrt(b (sigma+r)^2 / 4), (sigma+r)/2).
EllipsoidSpec zero_set_ellipsoid(const LorenzParams& params);

/// Largest distance from the sphere center (0,0,sigma+r) to the zero-set
/// ellipsoid: grid search over a resolution x resolution parametric mesh,
/// then pattern-search refinement of the best candidates.
double min_enclosing_c(const LorenzParams& params, int resolution = 256);

enum class TrappingVerdict { invariant, violated, inconclusive };

std::string_view to_string(TrappingVerdict v);

struct TrappingReport {
  double c = 0.0;
  std::size_t sample_count = 0;
  double max_derivative = 0.0;
  StateVec worst_point;
  double c_min_enclosing = 0.0;
  double margin = 0.0;  // 1e-6 c^2
  TrappingVerdict verdict = TrappingVerdict::inconclusive;
  std::uint64_t seed = 0;
};

/// Sampled (not interval-arithmetic) certificate that the sphere of radius c
/// is positively invariant. Evaluates d(c^2)/dt on a seeded random rotation
/// of a Fibonacci lattice, then refines the 50 worst samples by projected
/// gradient ascent on the sphere.
///
/// verdict: violated if max_derivative > 0; invariant if max_derivative <=
/// -1e-6 c^2 and c > c_min_enclosing; inconclusive otherwise.
TrappingReport verify_trapping(double c, const LorenzParams& params, std::size_t n_samples, std::uint64_t seed);

/// n quasi-uniform points on a sphere, rotated by a rotation drawn from seed.
std::vector<StateVec> fibonacci_sphere(std::size_t n, const StateVec& center, double radius, std::uint64_t seed);

/// Mesh of the ellipsoid surface as CSV x,y,z (n_theta rings, n_phi points per ring).
std::string ellipsoid_mesh_csv(const EllipsoidSpec& ellipsoid, int n_theta, int n_phi);

}  // namespace omega_limit
