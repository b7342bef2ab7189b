#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "omega_limit/equilibria.hpp"
#include "omega_limit/integrate.hpp"
#include "omega_limit/state.hpp"
#include "omega_limit/systems.hpp"

namespace omega_limit {

/// Post-transient samples of one trajectory, a finite stand-in for its
/// omega-limit set.
struct PointCloud {
  std::vector<StateVec> points;
  double t_transient = 0.0;
  double t_sample = 0.0;
  double dt_sample = 0.0;
  StateVec source_ic;

  std::size_t dimension() const { return points.empty() ? source_ic.size() : points.front().size(); }
};

/// Integrates through [0, t_transient] without recording, then records the
/// dense-output state at t_transient + k dt_sample for k = 1..floor(t_sample / dt_sample).
PointCloud estimate_omega_set(const SystemSpec& system, const StateVec& ic, double t_transient, double t_sample,
                              double dt_sample, const IntegratorConfig& cfg);

struct Neighbor {
  std::size_t index;
  double distance;
};

/// Exact nearest-neighbour queries over a uniform grid of cubic cells.
///
/// Rings of cells are searched outward until no unvisited cell can hold a
/// closer point; queries far from the data fall back to a linear scan.
class PointIndex {
 public:
  PointIndex(std::span<const StateVec> points, double cell_size);

  Neighbor nearest(const StateVec& query) const;
  double cell_size() const noexcept { return cell_; }

 private:
  std::int64_t key(const std::array<std::int64_t, 3>& cell) const;
  std::array<std::int64_t, 3> cell_of(const StateVec& p) const;
  Neighbor brute_force(const StateVec& query) const;

  std::span<const StateVec> points_;
  std::size_t dim_;
  double cell_;
  std::array<double, 3> origin_{};
  std::array<std::int64_t, 3> dims_{1, 1, 1};
  std::vector<std::pair<std::int64_t, std::size_t>> entries_;  // sorted by key
};

struct CloudDistance {
  double sym_avg;        // mean of the two directed mean nearest-neighbour distances
  double sym_hausdorff;  // max of the two directed Hausdorff distances
};

CloudDistance cloud_distance(const PointCloud& a, const PointCloud& b);

struct EquilibriumProximity {
  StateVec location;
  double distance;
  bool on_set;
};

inline constexpr double kDefaultOnSetEps = 0.5;

std::vector<EquilibriumProximity> equilibria_on_set(const PointCloud& cloud,
                                                    std::span<const EquilibriumReport> reports,
                                                    double eps = kDefaultOnSetEps);

struct Surface {
  int genus;
  int euler_number;
  std::string name;
};

struct TopologyAdvice {
  int equilibria_on_set = 0;
  std::vector<Surface> consistent_surfaces;
  std::vector<Surface> excluded_surfaces;
  std::string verdict;
};

/// chi = 2 - 2 genus for a closed orientable surface.
int euler_characteristic(int genus);

/// Poincare-Hopf admissibility of closed orientable surfaces (genus
/// 0..max_genus) as carriers of an invariant set with the given number of
/// equilibria: a flow without equilibria on a closed surface forces chi = 0.
TopologyAdvice euler_advisor(int equilibria_on_set, int max_genus = 3);

struct AxisRange {
  double min;
  double max;
};

std::vector<AxisRange> bounding_box(const PointCloud& cloud);

/// Cloud CSV with header x,y,z (3-D), x,y (2-D) or y (1-D).
std::string cloud_csv(const PointCloud& cloud);

/// Two-coordinate projection CSV, e.g. axes (0, 2) gives header x,z.
std::string projection_csv(const PointCloud& cloud, std::size_t axis_a, std::size_t axis_b);

}  // namespace omega_limit
