#include "omega_limit/omega.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "omega_limit/error.hpp"
#include "omega_limit/io.hpp"
#include "omega_limit/parallel.hpp"

namespace omega_limit {

PointCloud estimate_omega_set(const SystemSpec& system, const StateVec& ic, double t_transient, double t_sample,
                              double dt_sample, const IntegratorConfig& cfg) {
  if (!(t_transient >= 0.0) || !(t_sample > 0.0) || !(dt_sample > 0.0 && dt_sample < t_sample)) {
    throw Error(ErrorKind::invalid_input, "omega estimate needs t_transient >= 0 and 0 < dt_sample < t_sample");
  }
  PointCloud cloud;
  cloud.t_transient = t_transient;
  cloud.t_sample = t_sample;
  cloud.dt_sample = dt_sample;
  cloud.source_ic = ic;

  const StateVec start = advance(system, ic, 0.0, t_transient, cfg);
  const double t_end = t_transient + t_sample;
  const auto count = static_cast<std::size_t>(std::floor(t_sample / dt_sample * (1.0 + 1e-12)));
  cloud.points.reserve(count);

  std::size_t k = 1;
  auto sample_time = [&](std::size_t i) { return std::min(t_end, t_transient + static_cast<double>(i) * dt_sample); };
  integrate_steps(system, start, t_transient, t_end, cfg, [&](const StepView& step) {
    while (k <= count && sample_time(k) <= step.t_end) {
      const double t = sample_time(k);
      cloud.points.push_back(t == step.t_end ? step.y_end : hermite_state(step, t));
      ++k;
    }
  });
  return cloud;
}

PointIndex::PointIndex(std::span<const StateVec> points, double cell_size) : points_(points), cell_(cell_size) {
  if (points.empty()) throw Error(ErrorKind::invalid_input, "cannot index an empty point set");
  if (!(cell_size > 0.0)) throw Error(ErrorKind::invalid_input, "cell size must be > 0");
  dim_ = points.front().size();
  std::array<double, 3> hi{};
  for (std::size_t d = 0; d < dim_; ++d) {
    origin_[d] = std::numeric_limits<double>::infinity();
    hi[d] = -std::numeric_limits<double>::infinity();
  }
  for (const auto& p : points) {
    if (p.size() != dim_) throw Error(ErrorKind::invalid_input, "mixed point dimensions");
    for (std::size_t d = 0; d < dim_; ++d) {
      origin_[d] = std::min(origin_[d], p[d]);
      hi[d] = std::max(hi[d], p[d]);
    }
  }
  // Coarsen until the cell count fits comfortably in a 64-bit key.
  while (true) {
    double total = 1.0;
    for (std::size_t d = 0; d < dim_; ++d) total *= std::floor((hi[d] - origin_[d]) / cell_) + 1.0;
    if (total < 1e15) break;
    cell_ *= 2.0;
  }
  for (std::size_t d = 0; d < dim_; ++d) {
    dims_[d] = static_cast<std::int64_t>(std::floor((hi[d] - origin_[d]) / cell_)) + 1;
  }
  entries_.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) entries_.emplace_back(key(cell_of(points[i])), i);
  std::sort(entries_.begin(), entries_.end());
}

std::array<std::int64_t, 3> PointIndex::cell_of(const StateVec& p) const {
  std::array<std::int64_t, 3> c{0, 0, 0};
  for (std::size_t d = 0; d < dim_; ++d) {
    c[d] = static_cast<std::int64_t>(std::floor((p[d] - origin_[d]) / cell_));
  }
  return c;
}

std::int64_t PointIndex::key(const std::array<std::int64_t, 3>& c) const {
  return c[0] + dims_[0] * (c[1] + dims_[1] * c[2]);
}

Neighbor PointIndex::brute_force(const StateVec& q) const {
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = distance(q, points_[i]);
    if (d < best.distance) best = {i, d};
  }
  return best;
}

Neighbor PointIndex::nearest(const StateVec& q) const {
  if (q.size() != dim_) throw Error(ErrorKind::invalid_input, "query dimension does not match index");
  const auto qc = cell_of(q);
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  for (std::int64_t ring = 0;; ++ring) {
    // Cells touched by this ring, bounded by the occupied grid.
    std::array<std::int64_t, 3> lo{0, 0, 0}, hi{0, 0, 0};
    bool covers_grid = true;
    double cells = 1.0;
    for (std::size_t d = 0; d < dim_; ++d) {
      lo[d] = std::max<std::int64_t>(0, qc[d] - ring);
      hi[d] = std::min<std::int64_t>(dims_[d] - 1, qc[d] + ring);
      covers_grid = covers_grid && qc[d] - ring <= 0 && qc[d] + ring >= dims_[d] - 1;
      cells *= static_cast<double>(std::max<std::int64_t>(0, hi[d] - lo[d] + 1));
    }
    if (cells > 8.0 * static_cast<double>(points_.size()) + 64.0) return brute_force(q);

    for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
      for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
        for (std::int64_t x = lo[0]; x <= hi[0]; ++x) {
          const std::int64_t cheb =
              std::max({std::abs(x - qc[0]), dim_ > 1 ? std::abs(y - qc[1]) : 0, dim_ > 2 ? std::abs(z - qc[2]) : 0});
          if (cheb != ring) continue;
          const std::int64_t k = key({x, y, z});
          auto it = std::lower_bound(entries_.begin(), entries_.end(), std::pair{k, std::size_t{0}});
          for (; it != entries_.end() && it->first == k; ++it) {
            const double d = distance(q, points_[it->second]);
            if (d < best.distance || (d == best.distance && it->second < best.index)) best = {it->second, d};
          }
        }
      }
    }
    if (best.distance <= static_cast<double>(ring) * cell_ || covers_grid) return best;
  }
}

namespace {

double default_cell(std::span<const StateVec> pts) {
  const std::size_t dim = pts.front().size();
  double volume = 1.0, widest = 0.0;
  std::vector<double> extent(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    double lo = pts.front()[d], hi = lo;
    for (const auto& p : pts) {
      lo = std::min(lo, p[d]);
      hi = std::max(hi, p[d]);
    }
    extent[d] = hi - lo;
    widest = std::max(widest, extent[d]);
  }
  if (widest == 0.0) return 1.0;
  for (double e : extent) volume *= std::max(e, widest * 1e-6);
  return std::max(widest * 1e-6, std::pow(volume / static_cast<double>(pts.size()), 1.0 / static_cast<double>(dim)));
}

struct Directed {
  double mean;
  double max;
};

Directed directed_distance(std::span<const StateVec> from, const PointIndex& to) {
  constexpr std::size_t kChunk = 4096;
  std::vector<double> sums(chunk_count(from.size(), kChunk), 0.0), maxima(sums.size(), 0.0);
  parallel_for_chunks(from.size(), kChunk, [&](std::size_t begin, std::size_t end, std::size_t c) {
    double s = 0.0, m = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double d = to.nearest(from[i]).distance;
      s += d;
      m = std::max(m, d);
    }
    sums[c] = s;
    maxima[c] = m;
  });
  double total = 0.0, m = 0.0;
  for (std::size_t c = 0; c < sums.size(); ++c) {
    total += sums[c];
    m = std::max(m, maxima[c]);
  }
  return {total / static_cast<double>(from.size()), m};
}

}  // namespace

CloudDistance cloud_distance(const PointCloud& a, const PointCloud& b) {
  if (a.points.empty() || b.points.empty()) throw Error(ErrorKind::invalid_input, "cloud_distance needs non-empty clouds");
  if (a.dimension() != b.dimension()) throw Error(ErrorKind::invalid_input, "cloud dimensions differ");
  const PointIndex index_a(a.points, default_cell(a.points));
  const PointIndex index_b(b.points, default_cell(b.points));
  const Directed ab = directed_distance(a.points, index_b);
  const Directed ba = directed_distance(b.points, index_a);
  return {0.5 * (ab.mean + ba.mean), std::max(ab.max, ba.max)};
}

std::vector<EquilibriumProximity> equilibria_on_set(const PointCloud& cloud,
                                                    std::span<const EquilibriumReport> reports, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorKind::invalid_input, "eps must be > 0");
  if (cloud.points.empty()) throw Error(ErrorKind::invalid_input, "cloud is empty");
  const PointIndex index(cloud.points, 2.0 * eps);
  std::vector<EquilibriumProximity> out;
  out.reserve(reports.size());
  for (const auto& rep : reports) {
    const Neighbor n = index.nearest(rep.location);
    out.push_back({rep.location, n.distance, n.distance <= eps});
  }
  return out;
}

int euler_characteristic(int genus) { return 2 - 2 * genus; }

namespace {

std::string surface_name(int genus) {
  switch (genus) {
    case 0: return "sphere";
    case 1: return "torus";
    case 2: return "double torus";
    case 3: return "triple torus";
    default: return "genus-" + std::to_string(genus) + " surface";
  }
}

}  // namespace

TopologyAdvice euler_advisor(int equilibria_on_set, int max_genus) {
  if (equilibria_on_set < 0) throw Error(ErrorKind::invalid_input, "equilibrium count must be >= 0");
  if (max_genus < 2) throw Error(ErrorKind::invalid_input, "max_genus must be >= 2");
  TopologyAdvice advice;
  advice.equilibria_on_set = equilibria_on_set;
  for (int g = 0; g <= max_genus; ++g) {
    Surface s{g, euler_characteristic(g), surface_name(g)};
    const bool admissible = equilibria_on_set > 0 || s.euler_number == 0;
    (admissible ? advice.consistent_surfaces : advice.excluded_surfaces).push_back(std::move(s));
  }
  if (equilibria_on_set == 0) {
    advice.verdict =
        "no equilibria on the estimated set: by Poincare-Hopf the index sum, hence the Euler number, must be 0, "
        "so the only consistent closed orientable surface is the torus (genus 1, chi = 0), including twisted-torus "
        "embeddings; the sphere (chi = 2) and multiple tori (chi < 0) would require equilibria";
  } else {
    advice.verdict = std::to_string(equilibria_on_set) +
                     " equilibria on the estimated set: their Poincare-Hopf index sum may be non-zero, so surfaces "
                     "with chi != 0 (e.g. the sphere, chi = 2) are admissible";
  }
  return advice;
}

std::vector<AxisRange> bounding_box(const PointCloud& cloud) {
  if (cloud.points.empty()) throw Error(ErrorKind::invalid_input, "bounding_box of an empty cloud");
  std::vector<AxisRange> box;
  for (double v : cloud.points.front()) box.push_back({v, v});
  for (const auto& p : cloud.points) {
    for (std::size_t d = 0; d < box.size(); ++d) {
      box[d].min = std::min(box[d].min, p[d]);
      box[d].max = std::max(box[d].max, p[d]);
    }
  }
  return box;
}

namespace {

std::string axis_name(std::size_t dimension, std::size_t axis) {
  if (dimension == 1) return "y";
  return std::string(1, "xyz"[axis]);
}

}  // namespace

std::string cloud_csv(const PointCloud& cloud) {
  const std::size_t dim = cloud.dimension();
  std::vector<std::string> header;
  for (std::size_t d = 0; d < dim; ++d) header.push_back(axis_name(dim, d));
  CsvWriter csv(std::move(header));
  for (const auto& p : cloud.points) csv.row(p.coords());
  return csv.str();
}

std::string projection_csv(const PointCloud& cloud, std::size_t axis_a, std::size_t axis_b) {
  const std::size_t dim = cloud.dimension();
  if (axis_a >= dim || axis_b >= dim) throw Error(ErrorKind::invalid_input, "projection axis out of range");
  CsvWriter csv({axis_name(dim, axis_a), axis_name(dim, axis_b)});
  for (const auto& p : cloud.points) csv.row({p[axis_a], p[axis_b]});
  return csv.str();
}

}  // namespace omega_limit
