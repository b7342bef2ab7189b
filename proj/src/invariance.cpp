#include "omega_limit/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "omega_limit/error.hpp"
#include "omega_limit/io.hpp"
#include "omega_limit/parallel.hpp"

namespace omega_limit {

namespace {

void require_3d(const StateVec& s) {
  if (s.size() != 3) throw Error(ErrorKind::invalid_input, "Lyapunov sphere needs a 3-D state");
}

StateVec sphere_center(const LorenzParams& p) { return StateVec{0.0, 0.0, p.sigma + p.r}; }

StateVec lyap_gradient(const StateVec& s, const LorenzParams& p) {
  return StateVec{-4.0 * p.sigma * s[0], -4.0 * s[1], -4.0 * p.b * s[2] + 2.0 * p.b * (p.sigma + p.r)};
}

double dot(const StateVec& a, const StateVec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// 53-bit uniforms from raw engine output so runs are identical across
// standard library implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Uniformly random rotation (Shoemake's quaternion construction).
Matrix random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double u1 = uniform01(rng), u2 = uniform01(rng), u3 = uniform01(rng);
  const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
  const double w = a * std::sin(2.0 * std::numbers::pi * u2), x = a * std::cos(2.0 * std::numbers::pi * u2);
  const double y = b * std::sin(2.0 * std::numbers::pi * u3), z = b * std::cos(2.0 * std::numbers::pi * u3);
  return Matrix(3, {1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),  //
                    2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),  //
                    2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)});
}

struct Candidate {
  double value;
  std::size_t index;
};

bool worse_first(const Candidate& a, const Candidate& b) {
  return a.value != b.value ? a.value > b.value : a.index < b.index;
}

// Projected gradient ascent of d(c^2)/dt over the sphere |p - center| = c.
StateVec ascend_on_sphere(StateVec p, const StateVec& center, double c, const LorenzParams& params) {
  StateVec u = (p - center) * (1.0 / c);
  double value = lyap_derivative_closed_form(p, params);
  double angle = 0.05;
  for (int it = 0; it < 2000 && angle > 1e-13; ++it) {
    const StateVec g = lyap_gradient(p, params);
    StateVec tangent = g - dot(g, u) * u;
    const double tn = tangent.norm();
    if (tn == 0.0) break;
    StateVec trial_u = u + (angle / tn) * tangent;
    trial_u *= 1.0 / trial_u.norm();
    const StateVec trial = center + c * trial_u;
    const double trial_value = lyap_derivative_closed_form(trial, params);
    if (trial_value > value) {
      u = trial_u;
      p = trial;
      value = trial_value;
      angle *= 1.5;
    } else {
      angle *= 0.5;
    }
  }
  return p;
}

}  // namespace

double lyap_value(const StateVec& s, const LorenzParams& p) {
  require_3d(s);
  const double dz = s[2] - (p.sigma + p.r);
  return s[0] * s[0] + s[1] * s[1] + dz * dz;
}

double lyap_derivative_chain_rule(const StateVec& s, const LorenzParams& p) {
  require_3d(s);
  const StateVec f = lorenz(p).rhs(s);
  return 2.0 * s[0] * f[0] + 2.0 * s[1] * f[1] + 2.0 * (s[2] - p.sigma - p.r) * f[2];
}

double lyap_derivative_closed_form(const StateVec& s, const LorenzParams& p) {
  require_3d(s);
  const double x = s[0], y = s[1], z = s[2];
  return -2.0 * p.sigma * x * x - 2.0 * y * y - 2.0 * p.b * z * z + 2.0 * p.b * (p.sigma + p.r) * z;
}

double lyap_derivative(const StateVec& s, const LorenzParams& p) {
  const double closed = lyap_derivative_closed_form(s, p);
  const double chain = lyap_derivative_chain_rule(s, p);
  // Floor covers rounding when the terms cancel to near zero.
  const double x = s[0], y = s[1], z = s[2];
  const double terms = 2.0 * p.sigma * x * x + 2.0 * y * y + 2.0 * p.b * z * z +
                       2.0 * std::abs(p.b * (p.sigma + p.r) * z) + 2.0 * (p.sigma + p.r) * std::abs(x * y);
  const double tol = 1e-9 * std::max(std::abs(closed), std::abs(chain)) + 64.0 * 0x1.0p-52 * terms;
  if (std::abs(closed - chain) > tol) {
    throw Error(ErrorKind::consistency, "d(c^2)/dt routes disagree at " + s.to_string() + ": " +
                                            format_double(closed) + " vs " + format_double(chain));
  }
  return closed;
}

double EllipsoidSpec::level(const StateVec& p) const {
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double d = (p[i] - center[i]) / semiaxes[i];
    s += d * d;
  }
  return s;
}

StateVec EllipsoidSpec::surface_point(double theta, double phi) const {
  const double st = std::sin(theta);
  return StateVec{center[0] + semiaxes[0] * st * std::cos(phi), center[1] + semiaxes[1] * st * std::sin(phi),
                  center[2] + semiaxes[2] * std::cos(theta)};
}

EllipsoidSpec zero_set_ellipsoid(const LorenzParams& p) {
  p.validate();
  const double s = p.sigma + p.r;
  EllipsoidSpec e;
  e.center = StateVec{0.0, 0.0, 0.5 * s};
  e.semiaxes = {std::sqrt(p.b * s * s / (4.0 * p.sigma)), std::sqrt(p.b * s * s / 4.0), 0.5 * s};
  return e;
}

double min_enclosing_c(const LorenzParams& params, int resolution) {
  if (resolution < 64) throw Error(ErrorKind::invalid_input, "min_enclosing_c needs resolution >= 64");
  const EllipsoidSpec e = zero_set_ellipsoid(params);
  auto objective = [&](double theta, double phi) { return lyap_value(e.surface_point(theta, phi), params); };

  struct GridPoint {
    double value, theta, phi;
  };
  std::vector<GridPoint> grid;
  grid.reserve(static_cast<std::size_t>(resolution + 1) * resolution);
  const double d_theta = std::numbers::pi / resolution;
  const double d_phi = 2.0 * std::numbers::pi / resolution;
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      grid.push_back({objective(i * d_theta, j * d_phi), i * d_theta, j * d_phi});
    }
  }
  const std::size_t keep = std::min<std::size_t>(8, grid.size());
  std::partial_sort(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(keep), grid.end(),
                    [](const GridPoint& a, const GridPoint& b) { return a.value > b.value; });

  double best = grid.front().value;
  for (std::size_t k = 0; k < keep; ++k) {
    double theta = grid[k].theta, phi = grid[k].phi, value = grid[k].value;
    double st = d_theta, sp = d_phi;
    while (st > 1e-14 || sp > 1e-14) {
      bool moved = false;
      for (auto [dt, dp] : {std::pair{st, 0.0}, {-st, 0.0}, {0.0, sp}, {0.0, -sp}}) {
        const double t = std::clamp(theta + dt, 0.0, std::numbers::pi);
        const double v = objective(t, phi + dp);
        if (v > value) {
          theta = t;
          phi += dp;
          value = v;
          moved = true;
          break;
        }
      }
      if (!moved) {
        st *= 0.5;
        sp *= 0.5;
      }
    }
    best = std::max(best, value);
  }
  return std::sqrt(best);
}

std::string_view to_string(TrappingVerdict v) {
  switch (v) {
    case TrappingVerdict::invariant: return "invariant";
    case TrappingVerdict::violated: return "violated";
    case TrappingVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

std::vector<StateVec> fibonacci_sphere(std::size_t n, const StateVec& center, double radius, std::uint64_t seed) {
  const Matrix rot = random_rotation(seed);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<StateVec> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(i);
    const StateVec u = rot.apply(StateVec{rho * std::cos(phi), rho * std::sin(phi), z});
    out[i] = center + radius * u;
  }
  return out;
}

TrappingReport verify_trapping(double c, const LorenzParams& params, std::size_t n_samples, std::uint64_t seed) {
  params.validate();
  if (!(c > 0.0)) throw Error(ErrorKind::invalid_input, "sphere radius must be > 0");
  if (n_samples < 1000) throw Error(ErrorKind::invalid_input, "verify_trapping needs at least 1000 samples");

  constexpr std::size_t kRefine = 50;
  constexpr std::size_t kChunk = 1 << 15;
  const StateVec center = sphere_center(params);
  const std::vector<StateVec> points = fibonacci_sphere(n_samples, center, c, seed);

  std::vector<std::vector<Candidate>> per_chunk(chunk_count(n_samples, kChunk));
  parallel_for_chunks(n_samples, kChunk, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
    std::vector<Candidate> local;
    local.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) local.push_back({lyap_derivative(points[i], params), i});
    const std::size_t keep = std::min(kRefine, local.size());
    std::partial_sort(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep), local.end(), worse_first);
    local.resize(keep);
    per_chunk[chunk] = std::move(local);
  });

  std::vector<Candidate> worst;
  for (const auto& chunk : per_chunk) worst.insert(worst.end(), chunk.begin(), chunk.end());
  std::sort(worst.begin(), worst.end(), worse_first);
  worst.resize(std::min(kRefine, worst.size()));

  TrappingReport rep;
  rep.c = c;
  rep.sample_count = n_samples;
  rep.seed = seed;
  rep.max_derivative = worst.front().value;
  rep.worst_point = points[worst.front().index];
  for (const auto& cand : worst) {
    const StateVec refined = ascend_on_sphere(points[cand.index], center, c, params);
    const double v = lyap_derivative(refined, params);
    if (v > rep.max_derivative) {
      rep.max_derivative = v;
      rep.worst_point = refined;
    }
  }
  rep.c_min_enclosing = min_enclosing_c(params, 256);
  rep.margin = 1e-6 * c * c;
  if (rep.max_derivative > 0.0) {
    rep.verdict = TrappingVerdict::violated;
  } else if (rep.max_derivative <= -rep.margin && c > rep.c_min_enclosing) {
    rep.verdict = TrappingVerdict::invariant;
  } else {
    rep.verdict = TrappingVerdict::inconclusive;
  }
  return rep;
}

std::string ellipsoid_mesh_csv(const EllipsoidSpec& ellipsoid, int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 3) throw Error(ErrorKind::invalid_input, "ellipsoid mesh too coarse");
  CsvWriter csv({"x", "y", "z"});
  for (int i = 0; i <= n_theta; ++i) {
    const double theta = std::numbers::pi * i / n_theta;
    for (int j = 0; j < n_phi; ++j) {
      const StateVec p = ellipsoid.surface_point(theta, 2.0 * std::numbers::pi * j / n_phi);
      csv.row({p[0], p[1], p[2]});
    }
  }
  return csv.str();
}

}  // namespace omega_limit
