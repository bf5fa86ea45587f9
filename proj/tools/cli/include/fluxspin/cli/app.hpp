#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxspin/cli/config.hpp"
#include "fluxspin/cli/output.hpp"

namespace fluxspin::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitPartial = 3,
  kExitDegenerate = 4,
};

// A command run needs this fraction of valid points to exit 0.
inline constexpr double kValidFraction = 0.95;

struct CommandOutput {
  nlohmann::json payload;
  CsvTable table{{}};
  std::optional<std::string> svg;
  std::size_t valid_points = 0;
  std::size_t total_points = 0;
  nlohmann::json failures = nlohmann::json::array();
  std::string summary;  // one line for stdout
};

// Exit code for a library error escaping a command.
int exit_code_for(const Error& e);

// kExitPartial when fewer than kValidFraction of the points are valid.
int completion_code(std::size_t valid_points, std::size_t total_points);

// Runs the configured computation. Library errors propagate.
CommandOutput run_command(const RunConfig& config);

// Full CLI: argument parsing, config loading, overrides, file output.
// `args` excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fluxspin::cli
