#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "omega_limit/io.hpp"

namespace omega_cli {

using omega_limit::Error;
using omega_limit::ErrorKind;

ConfigError::ConfigError(std::string message, std::string field, int line)
    : Error(ErrorKind::config, std::move(message)), field_(std::move(field)), line_(line) {}

namespace {

enum class Kind { number, positive, nonnegative, count, seed, choice, path, system, vec, vec_or_null, vec_list };

struct KeySpec {
  std::string key;
  Kind kind;
  json fallback;  // null: filled in after the system is known
  std::vector<std::string> choices{};
  std::size_t min_count = 0;
};

const std::vector<std::string> kParamKeys{"sigma", "r", "b", "mu", "a"};

std::vector<KeySpec> common_keys() {
  return {
      {"system", Kind::system, "lorenz"},
      {"out", Kind::path, "out"},
      {"seed", Kind::seed, 1},
      {"method", Kind::choice, "dopri5", {"dopri5", "rk4"}},
      {"rel_tol", Kind::positive, 1e-9},
      {"abs_tol", Kind::positive, 1e-11},
      {"h", Kind::positive, 1e-2},
      {"h_min", Kind::positive, 1e-12},
      {"h_max", Kind::positive, 1.0},
      {"max_steps", Kind::count, 20'000'000, {}, 1},
  };
}

std::vector<KeySpec> study_keys(std::string_view command) {
  if (command == "simulate") {
    return {{"ic", Kind::vec, nullptr}, {"t_end", Kind::positive, 50.0}, {"dt_output", Kind::nonnegative, 0.0}};
  }
  if (command == "equilibria") {
    return {{"guesses", Kind::vec_list, nullptr}, {"newton_tol", Kind::positive, 1e-12}};
  }
  if (command == "bifurcation") {
    return {{"r_min", Kind::positive, 0.1},   {"r_max", Kind::positive, 30.0},
            {"r_count", Kind::count, 300, {}, 2}, {"hopf_lo", Kind::positive, 1.5},
            {"hopf_hi", Kind::positive, 30.0}, {"hopf_tol", Kind::positive, 1e-9}};
  }
  if (command == "trapping") {
    return {{"c", Kind::positive, 45.0},
            {"samples", Kind::count, 1'000'000, {}, 1000},
            {"mesh_theta", Kind::count, 32, {}, 2},
            {"mesh_phi", Kind::count, 64, {}, 3},
            {"sphere_points", Kind::count, 2000, {}, 1}};
  }
  if (command == "omega") {
    return {{"ic", Kind::vec, nullptr},
            {"t_transient", Kind::nonnegative, 50.0},
            {"t_sample", Kind::positive, 500.0},
            {"dt_sample", Kind::positive, 0.01},
            {"compare_ic", Kind::vec_or_null, nullptr},
            {"on_set_eps", Kind::positive, 0.5},
            {"max_genus", Kind::count, 3, {}, 0}};
  }
  if (command == "section") {
    return {{"ic", Kind::vec, nullptr},
            {"t_transient", Kind::nonnegative, 50.0},
            {"t_sample", Kind::positive, 1000.0},
            {"axis", Kind::choice, nullptr, {"x", "y", "z"}},
            {"offset", Kind::number, nullptr},
            {"direction", Kind::choice, "both", {"both", "increasing", "decreasing"}}};
  }
  return {};
}

// Figure data is produced with pinned settings; only these may vary.
const std::vector<std::string> kFigureKeys{"seed", "out"};

int line_of(std::string_view text, std::string_view key) {
  const std::string quoted = "\"" + std::string(key) + "\"";
  const auto pos = text.find(quoted);
  if (pos == std::string_view::npos) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

json parse_document(std::string_view text) {
  if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return json::object();
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
    throw ConfigError(std::string("config is not a valid document: ") + e.what(), {}, line);
  }
  if (!doc.is_object()) throw ConfigError("config must be a flat object of key/value pairs", {}, 1);
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) throw ConfigError("nested sections are not supported", key, line_of(text, key));
  }
  return doc;
}

json default_ic(std::string_view system) {
  if (system == "quintic1d") return json::array({0.5});
  if (system == "vanderpol") return json::array({2.0, 0.0});
  if (system == "brusselator") return json::array({1.5, 3.0});
  return json::array({5.0, 5.0, 5.0});
}

bool is_finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

class Resolver {
 public:
  explicit Resolver(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    const int line = from_file_.contains(key) ? line_of(text_, key) : 0;
    std::string where = line > 0 ? "line " + std::to_string(line) + ", " : std::string();
    throw ConfigError(where + "field '" + key + "': " + why, key, line);
  }

  void mark_from_file(const std::string& key) { from_file_.insert(key); }
  void unmark(const std::string& key) { from_file_.erase(key); }

  json check(const KeySpec& spec, const json& v, std::size_t dim) const {
    const auto& k = spec.key;
    switch (spec.kind) {
      case Kind::number:
        if (!is_finite_number(v)) fail(k, "expected a finite number");
        return v;
      case Kind::positive:
        if (!is_finite_number(v) || v.get<double>() <= 0.0) fail(k, "expected a positive number");
        return v;
      case Kind::nonnegative:
        if (!is_finite_number(v) || v.get<double>() < 0.0) fail(k, "expected a non-negative number");
        return v;
      case Kind::count:
        if (!v.is_number_integer() || v.get<std::int64_t>() < static_cast<std::int64_t>(spec.min_count)) {
          fail(k, "expected an integer >= " + std::to_string(spec.min_count));
        }
        return v;
      case Kind::seed:
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
          fail(k, "expected a non-negative integer");
        }
        return v;
      case Kind::choice:
        if (!v.is_string() || std::find(spec.choices.begin(), spec.choices.end(), v.get<std::string>()) ==
                                  spec.choices.end()) {
          std::string options;
          for (const auto& c : spec.choices) options += (options.empty() ? "" : ", ") + c;
          fail(k, "expected one of " + options);
        }
        return v;
      case Kind::path:
      case Kind::system:
        if (!v.is_string() || v.get<std::string>().empty()) fail(k, "expected a non-empty string");
        return v;
      case Kind::vec_or_null:
        if (v.is_null()) return v;
        [[fallthrough]];
      case Kind::vec:
        check_vec(k, v, dim);
        return v;
      case Kind::vec_list:
        if (v.is_null()) return v;
        if (!v.is_array() || v.empty()) fail(k, "expected a non-empty list of states");
        for (const auto& item : v) check_vec(k, item, dim);
        return v;
    }
    return v;
  }

 private:
  void check_vec(const std::string& k, const json& v, std::size_t dim) const {
    if (!v.is_array() || v.size() != dim) fail(k, "expected a list of " + std::to_string(dim) + " numbers");
    for (const auto& x : v) {
      if (!is_finite_number(x)) fail(k, "state entries must be finite numbers");
    }
  }

  std::string_view text_;
  std::set<std::string> from_file_;
};

}  // namespace

std::vector<std::string> command_names() {
  return {"simulate", "equilibria", "bifurcation", "trapping", "omega", "section", "reproduce-figures"};
}

RunConfig RunConfig::resolve(std::string_view command, const std::optional<std::filesystem::path>& config_file,
                             const FlagOverrides& flags) {
  std::string text;
  if (config_file) {
    std::ifstream in(*config_file, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + config_file->string(), "config");
    std::ostringstream buf;
    buf << in.rdbuf();
    text = buf.str();
  }
  return resolve_text(command, text, flags);
}

RunConfig RunConfig::resolve_text(std::string_view command, std::string_view text, const FlagOverrides& flags) {
  const auto commands = command_names();
  if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
    throw ConfigError("unknown subcommand '" + std::string(command) + "'", "command");
  }
  const json doc = parse_document(text);
  Resolver res(text);

  const bool figures = command == "reproduce-figures";
  std::vector<KeySpec> specs;
  for (auto& s : common_keys()) {
    if (!figures || std::find(kFigureKeys.begin(), kFigureKeys.end(), s.key) != kFigureKeys.end()) {
      specs.push_back(std::move(s));
    }
  }
  for (auto& s : study_keys(command)) specs.push_back(std::move(s));

  auto find_spec = [&](std::string_view key) -> const KeySpec* {
    for (const auto& s : specs) {
      if (s.key == key) return &s;
    }
    return nullptr;
  };
  const bool takes_params = !figures;

  json given = json::object();
  for (const auto& [key, value] : doc.items()) {
    res.mark_from_file(key);
    const bool is_param = std::find(kParamKeys.begin(), kParamKeys.end(), key) != kParamKeys.end();
    if (!find_spec(key) && !(is_param && takes_params)) {
      res.fail(key, "unknown key for " + std::string(command));
    }
    given[key] = value;
  }
  auto flag = [&](const std::string& key, json value) {
    if (!find_spec(key) && !(key == "r" && takes_params)) {
      throw ConfigError("flag --" + key + " does not apply to " + std::string(command), key);
    }
    res.unmark(key);
    given[key] = std::move(value);
  };
  if (flags.system) flag("system", *flags.system);
  if (flags.r) flag("r", *flags.r);
  if (flags.out) flag("out", *flags.out);
  if (flags.seed) flag("seed", *flags.seed);

  RunConfig cfg;
  cfg.command_ = std::string(command);
  json& values = cfg.values_;
  values = json::object();
  values["command"] = command;

  std::string system_name;
  std::size_t dim = 3;
  if (!figures) {
    const KeySpec* sys_spec = find_spec("system");
    const json sys = res.check(*sys_spec, given.value("system", sys_spec->fallback), 0);
    system_name = sys.get<std::string>();
    const auto names = omega_limit::builtin_names();
    if (std::find(names.begin(), names.end(), system_name) == names.end()) {
      std::string options;
      for (const auto& n : names) options += (options.empty() ? "" : ", ") + n;
      res.fail("system", "unknown system '" + system_name + "' (available: " + options + ")");
    }
    values["system"] = system_name;

    omega_limit::ParamMap params = omega_limit::default_params(system_name);
    for (const auto& key : kParamKeys) {
      if (!given.contains(key)) continue;
      if (!params.contains(key)) res.fail(key, "not a parameter of system " + system_name);
      const json& v = given[key];
      if (!is_finite_number(v) || v.get<double>() <= 0.0) res.fail(key, "parameter must be a positive number");
      params[key] = v.get<double>();
    }
    for (const auto& [key, value] : params) values[key] = value;
    try {
      dim = omega_limit::builtin(system_name, params).dimension();
    } catch (const Error& e) {
      res.fail("system", e.what());
    }
  }

  for (const auto& spec : specs) {
    if (spec.key == "system") continue;
    json fallback = spec.fallback;
    if (fallback.is_null() && spec.key == "ic") fallback = default_ic(system_name);
    if (fallback.is_null() && spec.key == "axis") fallback = system_name == "vanderpol" ? "y" : "x";
    if (fallback.is_null() && spec.key == "offset") fallback = system_name == "brusselator" ? values["a"] : json(0.0);
    values[spec.key] = given.contains(spec.key) ? res.check(spec, given[spec.key], dim) : fallback;
  }

  // Cross-field checks, all before any computation.
  if (!figures) {
    try {
      cfg.integrator().validate();
    } catch (const Error& e) {
      res.fail(given.contains("h_min") ? "h_min" : "h_max", e.what());
    }
  }
  if (command == "bifurcation" || command == "trapping") {
    if (system_name != "lorenz") res.fail("system", std::string(command) + " is defined for the lorenz system only");
  }
  if (command == "bifurcation") {
    if (cfg.number("r_min") >= cfg.number("r_max")) res.fail("r_max", "must exceed r_min");
    if (cfg.number("hopf_lo") <= 1.0) res.fail("hopf_lo", "must exceed 1, where the off-origin equilibria exist");
    if (cfg.number("hopf_lo") >= cfg.number("hopf_hi")) res.fail("hopf_hi", "must exceed hopf_lo");
  }
  if (command == "omega" && cfg.number("dt_sample") > cfg.number("t_sample")) {
    res.fail("dt_sample", "must not exceed t_sample");
  }
  if (command == "section") {
    if (dim < 2) res.fail("system", "a section plane needs a system of dimension >= 2");
    const auto axis = static_cast<std::size_t>(cfg.text("axis")[0] - 'x');
    if (axis >= dim) res.fail("axis", "axis is outside the state of " + system_name);
  }
  return cfg;
}

const std::string& RunConfig::system_name() const { return values_.at("system").get_ref<const std::string&>(); }

omega_limit::SystemSpec RunConfig::system() const {
  omega_limit::ParamMap params;
  for (const auto& [key, value] : omega_limit::default_params(system_name())) params[key] = values_.at(key).get<double>();
  return omega_limit::builtin(system_name(), params);
}

omega_limit::IntegratorConfig RunConfig::integrator() const {
  omega_limit::IntegratorConfig c;
  c.mode = text("method") == "rk4" ? omega_limit::StepMode::fixed : omega_limit::StepMode::adaptive;
  c.h = number("h");
  c.rel_tol = number("rel_tol");
  c.abs_tol = number("abs_tol");
  c.h_min = number("h_min");
  c.h_max = number("h_max");
  c.max_steps = count("max_steps");
  return c;
}

std::uint64_t RunConfig::seed() const { return values_.at("seed").get<std::uint64_t>(); }

std::filesystem::path RunConfig::out() const { return text("out"); }

double RunConfig::number(std::string_view key) const { return values_.at(std::string(key)).get<double>(); }

std::size_t RunConfig::count(std::string_view key) const {
  return values_.at(std::string(key)).get<std::size_t>();
}

std::string RunConfig::text(std::string_view key) const { return values_.at(std::string(key)).get<std::string>(); }

bool RunConfig::is_null(std::string_view key) const { return values_.at(std::string(key)).is_null(); }

StateVec RunConfig::vec(std::string_view key) const {
  const auto v = values_.at(std::string(key)).get<std::vector<double>>();
  return StateVec(std::span<const double>(v));
}

std::vector<StateVec> RunConfig::vec_list(std::string_view key) const {
  std::vector<StateVec> out;
  for (const auto& item : values_.at(std::string(key))) {
    const auto v = item.get<std::vector<double>>();
    out.emplace_back(std::span<const double>(v));
  }
  return out;
}

}  // namespace omega_cli
