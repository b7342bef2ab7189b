#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omega_limit/integrate.hpp"
#include "omega_limit/state.hpp"

namespace omega_limit {

enum class Direction : int { decreasing = -1, both = 0, increasing = 1 };

struct CrossingEvent {
  double t;
  StateVec state;
  int direction;  // +1 when the coordinate increases through the plane
  double refine_residual;
};

/// Strict sign changes of state[axis] - offset between consecutive samples,
/// each refined on the Hermite dense output to |residual| <= 1e-10.
/// Tangential grazes without a sign change are not reported.
std::vector<CrossingEvent> find_crossings(const Trajectory& trajectory, std::size_t axis, double offset,
                                          Direction filter = Direction::both);

/// Either a state coordinate at each crossing or the interval between
/// consecutive crossing times.
struct Observable {
  enum class Kind { coordinate, time_interval };
  Kind kind = Kind::coordinate;
  std::size_t axis = 2;
  std::string name = "z";

  static Observable coordinate(std::size_t axis);
  static Observable time_interval();
  /// "x", "y", "z" or "t-interval"; anything else raises Error(invalid_input).
  static Observable parse(const std::string& text);
};

struct ReturnMapData {
  std::vector<std::pair<double, double>> pairs;  // (v_n, v_{n+1})
  std::string observable;
  double fit_residual_rms = 0.0;  // leave-one-out 3-NN residual, unnormalized
  double observable_range = 0.0;
};

/// Builds successive pairs from a scalar sequence (at least 3 values).
ReturnMapData make_return_map(std::span<const double> series, std::string observable);

/// Successive-value pairs of the observable over crossings that pass the
/// direction filter. Needs at least 3 events after filtering.
ReturnMapData return_map(std::span<const CrossingEvent> events, const Observable& observable,
                         Direction filter = Direction::both);

/// Successive local maxima of state[axis] (zeros of its derivative going
/// from + to -, refined to 1e-10) as (z_n, z_{n+1}) pairs.
ReturnMapData zmax_map(const Trajectory& trajectory, std::size_t axis = 2);

/// Leave-one-out k-nearest-neighbour prediction of v_{n+1} from v_n; RMS
/// residual divided by the observable range. Near 0 means the pairs lie on
/// the graph of a 1-D map; about 1/3 for structureless uniform pairs.
double regularity_score(const ReturnMapData& data, int k = 3);

/// CSV t,x,y,z,direction (coordinate columns follow the trajectory dimension).
std::string crossings_csv(std::span<const CrossingEvent> events);

/// CSV v_n,v_next.
std::string return_map_csv(const ReturnMapData& data);

}  // namespace omega_limit
