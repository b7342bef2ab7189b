#include "run.hpp"

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"

namespace omega_cli {

namespace {

enum ExitCode : int { kOk = 0, kConfig = 2, kNumeric = 3, kIo = 4 };

int report(std::ostream& err, json detail, int code) {
  detail["exit_code"] = code;
  err << json{{"error", detail}}.dump() << "\n";
  return code;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Numerical studies of flows and their omega-limit sets", "omega-limit"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  FlagOverrides flags;
  app.add_option("--config", config_path, "flat key/value config document");
  app.add_option("--system", flags.system, "system name (overrides config)");
  app.add_option("--r", flags.r, "Lorenz r (overrides config)");
  app.add_option("--out", flags.out, "output directory (overrides config)");
  app.add_option("--seed", flags.seed, "random seed (overrides config)");

  const char* descriptions[] = {"integrate one trajectory",
                                "locate and classify equilibria",
                                "scan r for the pitchfork and Hopf thresholds",
                                "check that a sphere is positively invariant",
                                "sample the omega-limit set of a trajectory",
                                "crossings of a plane and their return maps",
                                "write all figure data with pinned settings"};
  const auto names = command_names();
  for (std::size_t i = 0; i < names.size(); ++i) app.add_subcommand(names[i], descriptions[i])->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return report(std::cerr, {{"kind", "config"}, {"message", e.what()}}, kConfig);
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::optional<std::filesystem::path> file;
    if (config_path) file = *config_path;
    const RunConfig cfg = RunConfig::resolve(command, file, flags);
    const Artifacts art = execute(cfg);
    for (const auto& path : art.commit(cfg.out())) std::cout << "wrote " << path.generic_string() << "\n";
    return kOk;
  } catch (const ConfigError& e) {
    json detail{{"kind", "config"}, {"message", e.what()}};
    if (!e.field().empty()) detail["field"] = e.field();
    if (e.line() > 0) detail["line"] = e.line();
    return report(std::cerr, detail, kConfig);
  } catch (const omega_limit::DivergenceError& e) {
    return report(std::cerr,
                  {{"kind", "divergence"}, {"message", e.what()}, {"last_good_time", e.last_good_time()}},
                  kNumeric);
  } catch (const omega_limit::Error& e) {
    const int code = e.kind() == omega_limit::ErrorKind::io ? kIo : kNumeric;
    return report(std::cerr, {{"kind", std::string(omega_limit::to_string(e.kind()))}, {"message", e.what()}}, code);
  } catch (const std::filesystem::filesystem_error& e) {
    return report(std::cerr, {{"kind", "io"}, {"message", e.what()}}, kIo);
  }
}

}  // namespace omega_cli
