#pragma once

// Flat key-value run configuration with one section per geometry. Unknown
// keys and sections are errors (typo protection); missing optional keys take
// the documented defaults (v = 1.0, mode = all-channels, grid count = 401).

#include <map>
#include <string>

#include <Eigen/Core>

#include "tbsm/coupling.hpp"
#include "tbsm/heff.hpp"

namespace tbsm::cli {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RunConfig {
  std::string geometry;
  SelfEnergyMode mode = SelfEnergyMode::AllChannels;
  std::map<std::string, std::string> entries;  // "section.key" or "key" -> value

  std::string out_path;        // from --out
  std::string format = "csv";  // from --format
  int threads = 1;             // from TBSM_THREADS

  bool has(const std::string& key) const { return entries.count(key) > 0; }
  std::string text(const std::string& key, const std::string& fallback) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  double require_number(const std::string& key) const;
  int require_integer(const std::string& key) const;
};

RunConfig load_config(const std::string& path);

// Geometry and grid assembly from a validated config.
System build_system(const RunConfig& config);
Eigen::VectorXd energy_grid(const RunConfig& config);

}  // namespace tbsm::cli
