#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "omega_limit/equilibria.hpp"
#include "omega_limit/integrate.hpp"
#include "omega_limit/invariance.hpp"
#include "omega_limit/io.hpp"
#include "omega_limit/omega.hpp"
#include "omega_limit/section.hpp"

namespace omega_cli {

namespace fs = std::filesystem;
using namespace omega_limit;

void Artifacts::add(fs::path relative, std::string contents) {
  files_.emplace_back(std::move(relative), std::move(contents));
}

void Artifacts::add_json(fs::path relative, const json& doc) { add(std::move(relative), doc.dump(2) + "\n"); }

std::vector<fs::path> Artifacts::commit(const fs::path& root) const {
  std::vector<fs::path> written;
  for (const auto& [relative, contents] : files_) {
    write_file_atomic(root / relative, contents);
    written.push_back(root / relative);
  }
  return written;
}

namespace {

json state_json(const StateVec& s) { return json(std::vector<double>(s.begin(), s.end())); }

json with_config(const RunConfig& cfg, json doc) {
  doc["config"] = cfg.resolved();
  doc["seed"] = cfg.seed();
  return doc;
}

json equilibrium_json(const EquilibriumReport& e) {
  json eig = json::array();
  for (const auto& z : e.eigenvalues) eig.push_back({{"re", z.real()}, {"im", z.imag()}});
  return {{"location", state_json(e.location)},
          {"residual", e.residual},
          {"eigenvalues", eig},
          {"classification", std::string(to_string(e.classification))},
          {"stable_dimension", e.stable_dimension},
          {"unstable_dimension", e.unstable_dimension},
          {"iterations", e.iterations}};
}

std::vector<StateVec> default_guesses(std::size_t dim) {
  std::vector<StateVec> out;
  if (dim == 1) {
    for (int i = -4; i <= 28; ++i) out.push_back(StateVec{0.25 * i});
  } else if (dim == 2) {
    for (int i = -4; i <= 4; ++i) {
      for (int j = -4; j <= 4; ++j) out.push_back(StateVec{double(i), double(j)});
    }
  } else {
    for (int i = -2; i <= 2; ++i) {
      for (int j = -2; j <= 2; ++j) {
        for (int k = -2; k <= 2; ++k) out.push_back(StateVec{10.0 * i, 10.0 * j, 10.0 * k});
      }
    }
  }
  return out;
}

// Newton from every guess; failed starts are dropped and duplicates merged.
std::vector<EquilibriumReport> locate_equilibria(const SystemSpec& sys, const std::vector<StateVec>& guesses,
                                                 double tol) {
  std::vector<EquilibriumReport> found;
  for (const auto& g : guesses) {
    EquilibriumReport rep;
    try {
      rep = find_equilibrium(sys, g, tol);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::convergence || e.kind() == ErrorKind::singularity) continue;
      throw;
    }
    const bool seen = std::any_of(found.begin(), found.end(), [&](const EquilibriumReport& f) {
      return distance(f.location, rep.location) <= 1e-6 * std::max(1.0, rep.location.norm());
    });
    if (!seen) found.push_back(std::move(rep));
  }
  std::sort(found.begin(), found.end(), [](const EquilibriumReport& a, const EquilibriumReport& b) {
    return std::lexicographical_compare(a.location.begin(), a.location.end(), b.location.begin(), b.location.end());
  });
  return found;
}

std::vector<EquilibriumReport> equilibria_for(const SystemSpec& sys) {
  if (sys.name() == "lorenz") return lorenz_equilibria(lorenz_params(sys));
  return locate_equilibria(sys, default_guesses(sys.dimension()), 1e-12);
}

// Offset in [-5, 5) per coordinate from raw generator bits, so the value is
// the same on every standard library.
StateVec seeded_neighbor(const StateVec& ic, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  StateVec out = ic;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += -5.0 + 10.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  return out;
}

const char* axis_name(std::size_t axis) { return axis == 0 ? "x" : axis == 1 ? "y" : "z"; }

void add_cloud_files(Artifacts& art, const fs::path& dir, const PointCloud& cloud) {
  if (cloud.dimension() == 3) {
    art.add(dir / "xyz.csv", cloud_csv(cloud));
    art.add(dir / "xy.csv", projection_csv(cloud, 0, 1));
    art.add(dir / "xz.csv", projection_csv(cloud, 0, 2));
    art.add(dir / "yz.csv", projection_csv(cloud, 1, 2));
  } else {
    art.add(dir / "cloud.csv", cloud_csv(cloud));
  }
}

struct OmegaStudy {
  StateVec ic;
  double t_transient, t_sample, dt_sample;
  StateVec compare_ic;
  double on_set_eps;
  int max_genus;
};

json omega_summary(const SystemSpec& sys, const IntegratorConfig& integ, const OmegaStudy& study,
                   const std::vector<EquilibriumReport>& equilibria, PointCloud& cloud_out) {
  PointCloud cloud = estimate_omega_set(sys, study.ic, study.t_transient, study.t_sample, study.dt_sample, integ);
  const PointCloud other =
      estimate_omega_set(sys, study.compare_ic, study.t_transient, study.t_sample, study.dt_sample, integ);
  const CloudDistance d = cloud_distance(cloud, other);

  json box = json::object();
  const auto ranges = bounding_box(cloud);
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const std::string name = cloud.dimension() == 1 ? "y" : axis_name(i);
    box[name] = {ranges[i].min, ranges[i].max};
  }

  const auto prox = equilibria_on_set(cloud, equilibria, study.on_set_eps);
  json eq = json::array();
  int on_set = 0;
  for (const auto& p : prox) {
    eq.push_back({{"location", state_json(p.location)}, {"distance", p.distance}, {"on_set", p.on_set}});
    on_set += p.on_set ? 1 : 0;
  }

  const TopologyAdvice advice = euler_advisor(on_set, study.max_genus);
  auto surfaces = [](const std::vector<Surface>& list) {
    json out = json::array();
    for (const auto& s : list) out.push_back({{"genus", s.genus}, {"euler_number", s.euler_number}, {"name", s.name}});
    return out;
  };

  json summary = {{"points", cloud.points.size()},
                  {"ic", state_json(study.ic)},
                  {"bounding_box", box},
                  {"equilibria", eq},
                  {"topology",
                   {{"equilibria_on_set", on_set},
                    {"consistent_surfaces", surfaces(advice.consistent_surfaces)},
                    {"excluded_surfaces", surfaces(advice.excluded_surfaces)},
                    {"verdict", advice.verdict}}},
                  {"comparison",
                   {{"ic", state_json(study.compare_ic)},
                    {"sym_avg", d.sym_avg},
                    {"sym_hausdorff", d.sym_hausdorff}}}};
  if (sys.name() == "lorenz") {
    const LorenzParams p = lorenz_params(sys);
    double worst = 0.0;
    for (const auto& pt : cloud.points) worst = std::max(worst, lyap_value(pt, p));
    summary["max_sphere_radius"] = std::sqrt(worst);
  }
  cloud_out = std::move(cloud);
  return summary;
}

OmegaStudy omega_study(const RunConfig& cfg) {
  const StateVec ic = cfg.vec("ic");
  return {ic,
          cfg.number("t_transient"),
          cfg.number("t_sample"),
          cfg.number("dt_sample"),
          cfg.is_null("compare_ic") ? seeded_neighbor(ic, cfg.seed()) : cfg.vec("compare_ic"),
          cfg.number("on_set_eps"),
          static_cast<int>(cfg.count("max_genus"))};
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

Artifacts simulate(const RunConfig& cfg) {
  const SystemSpec sys = cfg.system();
  const Trajectory tr = integrate(sys, cfg.vec("ic"), 0.0, cfg.number("t_end"), cfg.integrator());
  Artifacts art;
  const double dt = cfg.number("dt_output");
  if (dt > 0.0) {
    std::vector<std::string> header{"t"};
    for (std::size_t i = 0; i < sys.dimension(); ++i) header.push_back(sys.dimension() == 1 ? "x1" : "x" + std::to_string(i + 1));
    CsvWriter w(header);
    const auto n = static_cast<std::size_t>(std::floor(cfg.number("t_end") / dt + 1e-9));
    std::vector<double> row(sys.dimension() + 1);
    for (std::size_t k = 0; k <= n; ++k) {
      const double t = std::min(static_cast<double>(k) * dt, cfg.number("t_end"));
      const StateVec s = sample_dense(tr, t);
      row[0] = t;
      std::copy(s.begin(), s.end(), row.begin() + 1);
      w.row(row);
    }
    art.add("trajectory.csv", w.str());
  } else {
    art.add("trajectory.csv", trajectory_csv(tr));
  }
  const StepStats st = tr.stats();
  art.add_json("simulate.json", with_config(cfg, {{"final_state", state_json(tr.states().back())},
                                                  {"accepted_steps", st.accepted},
                                                  {"rejected_steps", st.rejected},
                                                  {"min_step", st.accepted ? st.min_step : 0.0},
                                                  {"max_step", st.max_step}}));
  return art;
}

Artifacts equilibria(const RunConfig& cfg) {
  const SystemSpec sys = cfg.system();
  std::vector<EquilibriumReport> found;
  if (!cfg.is_null("guesses")) {
    found = locate_equilibria(sys, cfg.vec_list("guesses"), cfg.number("newton_tol"));
  } else if (sys.name() == "lorenz") {
    found = lorenz_equilibria(lorenz_params(sys));
  } else {
    found = locate_equilibria(sys, default_guesses(sys.dimension()), cfg.number("newton_tol"));
  }
  json list = json::array();
  for (const auto& e : found) list.push_back(equilibrium_json(e));
  Artifacts art;
  art.add_json("equilibria.json", with_config(cfg, {{"system", sys.name()}, {"equilibria", list}}));
  return art;
}

Artifacts bifurcation(const RunConfig& cfg) {
  const LorenzParams p = lorenz_params(cfg.system());
  const auto grid = linspace(cfg.number("r_min"), cfg.number("r_max"), cfg.count("r_count"));
  const BifurcationScan scan = pitchfork_scan(grid, p.sigma, p.b);
  const double hopf = hopf_threshold(cfg.number("hopf_lo"), cfg.number("hopf_hi"), cfg.number("hopf_tol"), p.sigma, p.b);
  const double analytic = hopf_threshold_analytic(p.sigma, p.b);
  Artifacts art;
  art.add("bifurcation.csv", bifurcation_csv(scan));
  art.add_json("bifurcation.json", with_config(cfg, {{"parameter", scan.parameter},
                                                     {"hopf_threshold", hopf},
                                                     {"hopf_threshold_analytic", analytic},
                                                     {"hopf_abs_difference", std::abs(hopf - analytic)},
                                                     {"pitchfork_thresholds", scan.pitchfork_thresholds},
                                                     {"grid_hopf_thresholds", scan.hopf_thresholds},
                                                     {"rows", scan.rows.size()}}));
  return art;
}

std::string sphere_csv(const std::vector<StateVec>& points, const LorenzParams& p) {
  CsvWriter w({"x", "y", "z", "dc2dt"});
  for (const auto& s : points) w.row({s[0], s[1], s[2], lyap_derivative(s, p)});
  return w.str();
}

json trapping_json(const TrappingReport& rep, const EllipsoidSpec& e) {
  return {{"c", rep.c},
          {"samples", rep.sample_count},
          {"max_derivative", rep.max_derivative},
          {"worst_point", state_json(rep.worst_point)},
          {"c_min_enclosing", rep.c_min_enclosing},
          {"margin", rep.margin},
          {"verdict", std::string(to_string(rep.verdict))},
          {"zero_set_ellipsoid",
           {{"center", state_json(e.center)}, {"semiaxes", {e.semiaxes[0], e.semiaxes[1], e.semiaxes[2]}}}}};
}

Artifacts trapping(const RunConfig& cfg) {
  const LorenzParams p = lorenz_params(cfg.system());
  const double c = cfg.number("c");
  const TrappingReport rep = verify_trapping(c, p, cfg.count("samples"), cfg.seed());
  const EllipsoidSpec e = zero_set_ellipsoid(p);
  const auto sphere = fibonacci_sphere(cfg.count("sphere_points"), StateVec{0.0, 0.0, p.sigma + p.r}, c, cfg.seed());
  Artifacts art;
  art.add_json("trapping.json", with_config(cfg, trapping_json(rep, e)));
  art.add("ellipsoid.csv", ellipsoid_mesh_csv(e, static_cast<int>(cfg.count("mesh_theta")),
                                              static_cast<int>(cfg.count("mesh_phi"))));
  art.add("sphere_samples.csv", sphere_csv(sphere, p));
  return art;
}

Artifacts omega(const RunConfig& cfg) {
  const SystemSpec sys = cfg.system();
  PointCloud cloud;
  const json summary = omega_summary(sys, cfg.integrator(), omega_study(cfg), equilibria_for(sys), cloud);
  Artifacts art;
  add_cloud_files(art, "", cloud);
  art.add_json("summary.json", with_config(cfg, summary));
  return art;
}

Direction parse_direction(const std::string& s) {
  if (s == "increasing") return Direction::increasing;
  if (s == "decreasing") return Direction::decreasing;
  return Direction::both;
}

std::string file_stem(const std::string& observable) {
  std::string out = observable;
  std::replace(out.begin(), out.end(), '-', '_');
  return out;
}

json map_json(const ReturnMapData& d, const std::string& file) {
  double mean = 0.0;
  for (const auto& pr : d.pairs) mean += pr.first;
  mean /= static_cast<double>(d.pairs.size());
  return {{"observable", d.observable},
          {"pairs", d.pairs.size()},
          {"regularity_score", regularity_score(d)},
          {"observable_range", d.observable_range},
          {"mean", mean},
          {"file", file}};
}

Artifacts section(const RunConfig& cfg) {
  const SystemSpec sys = cfg.system();
  const auto integ = cfg.integrator();
  const double t0 = cfg.number("t_transient");
  const StateVec start = advance(sys, cfg.vec("ic"), 0.0, t0, integ);
  const Trajectory tr = integrate(sys, start, t0, t0 + cfg.number("t_sample"), integ);

  const auto axis = static_cast<std::size_t>(cfg.text("axis")[0] - 'x');
  const Direction dir = parse_direction(cfg.text("direction"));
  const auto events = find_crossings(tr, axis, cfg.number("offset"), dir);

  Artifacts art;
  art.add("crossings.csv", crossings_csv(events));
  json maps = json::array();
  std::vector<Observable> observables;
  for (std::size_t i = 0; i < sys.dimension(); ++i) {
    if (i != axis) observables.push_back(Observable::coordinate(i));
  }
  observables.push_back(Observable::time_interval());
  for (const auto& obs : observables) {
    const ReturnMapData d = return_map(events, obs);
    const std::string file = "returnmap_" + file_stem(obs.name) + ".csv";
    art.add(file, return_map_csv(d));
    maps.push_back(map_json(d, file));
  }
  const std::size_t max_axis = sys.dimension() - 1;
  const ReturnMapData maxima = zmax_map(tr, max_axis);
  const std::string max_file = std::string(axis_name(max_axis)) + "max.csv";
  art.add(max_file, return_map_csv(maxima));

  art.add_json("section.json", with_config(cfg, {{"crossings", events.size()},
                                                 {"axis", cfg.text("axis")},
                                                 {"offset", cfg.number("offset")},
                                                 {"direction", cfg.text("direction")},
                                                 {"return_maps", maps},
                                                 {"maxima", map_json(maxima, max_file)}}));
  return art;
}

// Settings behind the figure data. Only the seed and output directory vary.
Artifacts reproduce_figures(const RunConfig& cfg) {
  Artifacts art;
  json manifest = json::array();
  auto record = [&](const std::string& path, const char* figure, const char* content) {
    manifest.push_back({{"path", path}, {"figure", figure}, {"content", content}});
  };

  // fig1: the one-dimensional quintic flow and its basins.
  const SystemSpec quintic = builtin("quintic1d");
  {
    CsvWriter phase({"y", "f"});
    for (int i = 0; i <= 600; ++i) {
      const double y = 0.01 * i;
      phase.row({y, quintic.rhs(StateVec{y})[0]});
    }
    art.add("fig1/quintic_phase.csv", phase.str());
    record("fig1/quintic_phase.csv", "fig1", "vector field f(y) of the quintic flow on [0, 6]");

    CsvWriter basins({"ic", "t", "y"});
    for (double y0 : {0.5, 1.5, 2.5, 3.5, 4.5, 5.5, 6.0}) {
      const Trajectory tr = integrate(quintic, StateVec{y0}, 0.0, 50.0, {});
      for (int k = 0; k <= 500; ++k) {
        const double t = 0.1 * k;
        basins.row({y0, t, sample_dense(tr, t)[0]});
      }
    }
    art.add("fig1/quintic_basins.csv", basins.str());
    record("fig1/quintic_basins.csv", "fig1", "trajectories y(t) from seven initial values");

    json eq = json::array();
    for (const auto& e : locate_equilibria(quintic, default_guesses(1), 1e-12)) eq.push_back(equilibrium_json(e));
    art.add_json("fig1/quintic_equilibria.json", with_config(cfg, {{"equilibria", eq}}));
    record("fig1/quintic_equilibria.json", "fig1", "equilibria y = 1..5 with stability");
  }

  // fig2: the Lyapunov sphere and the ellipsoid where its derivative vanishes.
  const LorenzParams p;
  {
    const double c = 45.0;
    const TrappingReport rep = verify_trapping(c, p, 1'000'000, cfg.seed());
    const EllipsoidSpec e = zero_set_ellipsoid(p);
    art.add("fig2/ellipsoid.csv", ellipsoid_mesh_csv(e, 32, 64));
    record("fig2/ellipsoid.csv", "fig2", "mesh of the zero set of dc2/dt, centered at (0, 0, 19)");
    art.add("fig2/sphere_samples.csv", sphere_csv(fibonacci_sphere(2000, StateVec{0.0, 0.0, p.sigma + p.r}, c, cfg.seed()), p));
    record("fig2/sphere_samples.csv", "fig2", "points on the sphere c = 45 with dc2/dt");
    art.add_json("fig2/trapping.json", with_config(cfg, trapping_json(rep, e)));
    record("fig2/trapping.json", "fig2", "trapping verdict for c = 45");
  }

  // fig3: the Lorenz attractor and its projections.
  {
    const SystemSpec sys = lorenz(p);
    const StateVec ic{5.0, 5.0, 5.0};
    const OmegaStudy study{ic, 50.0, 500.0, 0.01, seeded_neighbor(ic, cfg.seed()), kDefaultOnSetEps, 3};
    PointCloud cloud;
    const json summary = omega_summary(sys, {}, study, lorenz_equilibria(p), cloud);
    add_cloud_files(art, "fig3", cloud);
    art.add_json("fig3/summary.json", with_config(cfg, summary));
    for (const char* f : {"fig3/xyz.csv", "fig3/xy.csv", "fig3/xz.csv", "fig3/yz.csv"}) {
      record(f, "fig3", "post-transient Lorenz samples, r = 28, ic (5, 5, 5)");
    }
    record("fig3/summary.json", "fig3", "bounding box, equilibrium distances, topology advice");
  }

  art.add_json("manifest.json", with_config(cfg, {{"files", manifest}}));
  return art;
}

}  // namespace

Artifacts execute(const RunConfig& cfg) {
  const std::string& c = cfg.command();
  if (c == "simulate") return simulate(cfg);
  if (c == "equilibria") return equilibria(cfg);
  if (c == "bifurcation") return bifurcation(cfg);
  if (c == "trapping") return trapping(cfg);
  if (c == "omega") return omega(cfg);
  if (c == "section") return section(cfg);
  return reproduce_figures(cfg);
}

}  // namespace omega_cli
