#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "config.hpp"

namespace omega_cli {

/// Output files held in memory until the whole computation has succeeded.
class Artifacts {
 public:
  void add(std::filesystem::path relative, std::string contents);
  void add_json(std::filesystem::path relative, const json& doc);
  /// Writes every file under `root`, each through an atomic rename.
  std::vector<std::filesystem::path> commit(const std::filesystem::path& root) const;
  const std::vector<std::pair<std::filesystem::path, std::string>>& files() const noexcept { return files_; }

 private:
  std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

Artifacts execute(const RunConfig& cfg);

}  // namespace omega_cli
