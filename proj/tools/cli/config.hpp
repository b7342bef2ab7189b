#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "omega_limit/error.hpp"
#include "omega_limit/integrate.hpp"
#include "omega_limit/state.hpp"
#include "omega_limit/systems.hpp"

namespace omega_cli {

using nlohmann::json;
using omega_limit::StateVec;

/// Rejected configuration. Carries the offending field and, when the value
/// came from a file, the line it sits on.
class ConfigError : public omega_limit::Error {
 public:
  ConfigError(std::string message, std::string field = {}, int line = 0);
  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Values given on the command line; each one, when present, wins over the
/// config file.
struct FlagOverrides {
  std::optional<std::string> system;
  std::optional<double> r;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

/// A fully resolved and validated run: every study key holds either its
/// default or the supplied value.
class RunConfig {
 public:
  static RunConfig resolve(std::string_view command, const std::optional<std::filesystem::path>& config_file,
                           const FlagOverrides& flags);
  /// Same as resolve() with the config document given as text.
  static RunConfig resolve_text(std::string_view command, std::string_view text, const FlagOverrides& flags);

  const std::string& command() const noexcept { return command_; }
  const std::string& system_name() const;
  omega_limit::SystemSpec system() const;
  omega_limit::IntegratorConfig integrator() const;
  std::uint64_t seed() const;
  std::filesystem::path out() const;

  double number(std::string_view key) const;
  std::size_t count(std::string_view key) const;
  std::string text(std::string_view key) const;
  bool is_null(std::string_view key) const;
  StateVec vec(std::string_view key) const;
  std::vector<StateVec> vec_list(std::string_view key) const;

  /// Everything, defaults included, as written into output JSON.
  const json& resolved() const noexcept { return values_; }

 private:
  std::string command_;
  json values_;
};

std::vector<std::string> command_names();

}  // namespace omega_cli
