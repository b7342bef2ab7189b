#include "omega_limit/section.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "omega_limit/error.hpp"
#include "omega_limit/io.hpp"

namespace omega_limit {

namespace {

constexpr double kRefineTolerance = 1e-10;

// Illinois-modified regula falsi on a bracket with g(a), g(b) of opposite sign.
template <class Fn>
double refine_root(Fn g, double a, double b, double ga, double gb) {
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    const double t = (a * gb - b * ga) / (gb - ga);
    const double gt = g(t);
    if (gt == 0.0 || std::abs(gt) <= 1e-3 * kRefineTolerance || b - a <= 4.0 * 0x1.0p-52 * std::abs(t)) return t;
    if ((gt < 0.0) == (ga < 0.0)) {
      a = t;
      ga = gt;
      if (side == -1) gb *= 0.5;
      side = -1;
    } else {
      b = t;
      gb = gt;
      if (side == 1) ga *= 0.5;
      side = 1;
    }
  }
  return std::abs(ga) < std::abs(gb) ? a : b;
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

bool passes(int direction, Direction filter) {
  return filter == Direction::both || direction == static_cast<int>(filter);
}

std::string coordinate_name(std::size_t dimension, std::size_t axis) {
  if (dimension == 1) return "y";
  return std::string(1, "xyz"[axis]);
}

}  // namespace

std::vector<CrossingEvent> find_crossings(const Trajectory& traj, std::size_t axis, double offset, Direction filter) {
  if (axis >= traj.dimension()) throw Error(ErrorKind::invalid_input, "section axis out of range");
  std::vector<CrossingEvent> events;
  if (traj.size() < 2) return events;

  std::optional<std::size_t> prev;  // last sample strictly off the plane
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double s = traj.state(i)[axis] - offset;
    if (s == 0.0) continue;
    if (prev && sign_of(s) != sign_of(traj.state(*prev)[axis] - offset)) {
      const int direction = s > 0.0 ? 1 : -1;
      CrossingEvent ev{0.0, StateVec{}, direction, 0.0};
      if (i == *prev + 1) {
        const StepView seg = traj.segment(*prev);
        auto g = [&](double t) { return hermite_state(seg, t)[axis] - offset; };
        const double sp = traj.state(*prev)[axis] - offset;
        ev.t = refine_root(g, seg.t_start, seg.t_end, sp, s);
        ev.state = hermite_state(seg, ev.t);
        ev.refine_residual = std::abs(ev.state[axis] - offset);
      } else {
        // The trajectory sits exactly on the plane at sample prev + 1.
        ev.t = traj.time(*prev + 1);
        ev.state = traj.state(*prev + 1);
        ev.refine_residual = 0.0;
      }
      if (passes(direction, filter)) events.push_back(ev);
    }
    prev = i;
  }
  return events;
}

Observable Observable::coordinate(std::size_t axis) {
  if (axis >= kMaxDimension) throw Error(ErrorKind::invalid_input, "observable axis out of range");
  return Observable{Kind::coordinate, axis, std::string(1, "xyz"[axis])};
}

Observable Observable::time_interval() { return Observable{Kind::time_interval, 0, "t-interval"}; }

Observable Observable::parse(const std::string& text) {
  if (text == "x") return coordinate(0);
  if (text == "y") return coordinate(1);
  if (text == "z") return coordinate(2);
  if (text == "t-interval") return time_interval();
  throw Error(ErrorKind::invalid_input, "unknown observable '" + text + "' (expected x, y, z or t-interval)");
}

namespace {

// Leave-one-out k-NN residuals of v_next given v_n.
std::vector<double> loo_residuals(const ReturnMapData& data, int k) {
  const std::size_t n = data.pairs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data.pairs[a].first < data.pairs[b].first; });
  std::vector<double> residuals(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const double v = data.pairs[order[pos]].first;
    std::size_t left = pos, right = pos + 1;  // left is one past the next candidate
    double sum = 0.0;
    for (int taken = 0; taken < k; ++taken) {
      const bool has_left = left > 0;
      const bool has_right = right < n;
      bool take_left;
      if (has_left && has_right) {
        take_left = v - data.pairs[order[left - 1]].first <= data.pairs[order[right]].first - v;
      } else {
        take_left = has_left;
      }
      const std::size_t idx = take_left ? order[--left] : order[right++];
      sum += data.pairs[idx].second;
    }
    residuals[order[pos]] = data.pairs[order[pos]].second - sum / k;
  }
  return residuals;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return v.empty() ? 0.0 : std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

ReturnMapData make_return_map(std::span<const double> series, std::string observable) {
  if (series.size() < 2) throw Error(ErrorKind::insufficient_data, "return map needs at least 2 observations");
  ReturnMapData data;
  data.observable = std::move(observable);
  for (std::size_t i = 0; i + 1 < series.size(); ++i) data.pairs.emplace_back(series[i], series[i + 1]);
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  data.observable_range = *hi - *lo;
  if (data.pairs.size() >= 4) data.fit_residual_rms = rms(loo_residuals(data, 3));
  return data;
}

ReturnMapData return_map(std::span<const CrossingEvent> events, const Observable& observable, Direction filter) {
  std::vector<const CrossingEvent*> kept;
  for (const auto& e : events) {
    if (passes(e.direction, filter)) kept.push_back(&e);
  }
  if (kept.size() < 3) {
    throw Error(ErrorKind::insufficient_data,
                "return map needs at least 3 crossings, got " + std::to_string(kept.size()));
  }
  std::vector<double> series;
  if (observable.kind == Observable::Kind::time_interval) {
    for (std::size_t i = 0; i + 1 < kept.size(); ++i) series.push_back(kept[i + 1]->t - kept[i]->t);
  } else {
    if (observable.axis >= kept.front()->state.size()) {
      throw Error(ErrorKind::invalid_input, "observable axis out of range for crossing states");
    }
    for (const auto* e : kept) series.push_back(e->state[observable.axis]);
  }
  return make_return_map(series, observable.name);
}

ReturnMapData zmax_map(const Trajectory& traj, std::size_t axis) {
  if (axis >= traj.dimension()) throw Error(ErrorKind::invalid_input, "zmax axis out of range");
  std::vector<double> maxima;
  std::optional<std::size_t> prev;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double d = traj.derivative(i)[axis];
    if (d == 0.0) continue;
    if (prev && d < 0.0 && traj.derivative(*prev)[axis] > 0.0) {
      if (i == *prev + 1) {
        const StepView seg = traj.segment(*prev);
        auto g = [&](double t) { return hermite_derivative(seg, t)[axis]; };
        const double t = refine_root(g, seg.t_start, seg.t_end, traj.derivative(*prev)[axis], d);
        maxima.push_back(hermite_state(seg, t)[axis]);
      } else {
        maxima.push_back(traj.state(*prev + 1)[axis]);
      }
    }
    prev = i;
  }
  if (maxima.size() < 3) {
    throw Error(ErrorKind::insufficient_data, "zmax map needs at least 3 maxima, got " + std::to_string(maxima.size()));
  }
  return make_return_map(maxima, coordinate_name(traj.dimension(), axis) + "-max");
}

double regularity_score(const ReturnMapData& data, int k) {
  if (k < 1) throw Error(ErrorKind::invalid_input, "k must be >= 1");
  if (data.pairs.size() < static_cast<std::size_t>(k) + 2) {
    throw Error(ErrorKind::insufficient_data, "regularity score needs at least k + 2 pairs");
  }
  if (data.observable_range == 0.0) return 0.0;
  return rms(loo_residuals(data, k)) / data.observable_range;
}

std::string crossings_csv(std::span<const CrossingEvent> events) {
  const std::size_t dim = events.empty() ? 3 : events.front().state.size();
  std::vector<std::string> header{"t"};
  for (std::size_t d = 0; d < dim; ++d) header.push_back(coordinate_name(dim, d));
  header.push_back("direction");
  CsvWriter csv(std::move(header));
  std::vector<double> row(dim + 2);
  for (const auto& e : events) {
    row[0] = e.t;
    for (std::size_t d = 0; d < dim; ++d) row[d + 1] = e.state[d];
    row[dim + 1] = e.direction;
    csv.row(row);
  }
  return csv.str();
}

std::string return_map_csv(const ReturnMapData& data) {
  CsvWriter csv({"v_n", "v_next"});
  for (const auto& [a, b] : data.pairs) csv.row({a, b});
  return csv.str();
}

}  // namespace omega_limit
