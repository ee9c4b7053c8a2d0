#pragma once

#include <string>

#include "cli/config.hpp"

namespace tbsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitValidation = 3;

int cmd_sweep(const RunConfig& config);
int cmd_poles(const RunConfig& config);
int cmd_track(const RunConfig& config);
int cmd_validate(const RunConfig& config);

// Loads the config, dispatches, and maps errors to exit codes
// (1 usage/config, 2 numerical failure, 3 validation failure).
int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_path, const std::string& format);

}  // namespace tbsm::cli
