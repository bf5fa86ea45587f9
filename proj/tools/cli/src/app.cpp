#include "fluxspin/cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>

#include <CLI11.hpp>

#ifndef FLUXSPIN_VERSION
#define FLUXSPIN_VERSION "unknown"
#endif

namespace fluxspin::cli {

using nlohmann::json;

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}


}  // namespace

int exit_code_for(const Error& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const NonErgodic*>(&e) || dynamic_cast<const ZeroRates*>(&e) ||
      dynamic_cast<const NotSupported*>(&e))
    return kExitConfig;
  if (dynamic_cast<const NumericalDegeneracy*>(&e) || dynamic_cast<const PoorFit*>(&e)) return kExitDegenerate;
  return kExitFailure;
}

int completion_code(std::size_t valid_points, std::size_t total_points) {
  if (total_points > 0 && static_cast<double>(valid_points) < kValidFraction * static_cast<double>(total_points))
    return kExitPartial;
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fluxspin: spin decoherence driven by classical fluctuators"};
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  bool plot = false;
  std::optional<std::string> out_dir;
  app.add_option("command", command, "simulate | crossover | fig2 | mc-validate | sweetspot")
      ->required()
      ->check(CLI::IsMember({"simulate", "crossover", "fig2", "mc-validate", "sweetspot"}));
  app.add_option("--config", config_path, "JSON config, or a result envelope to replay")->required();
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--workers", workers, "worker threads, 0 = all cores (overrides the config)");
  app.add_flag("--plot", plot, "also write an SVG plot");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.set_version_flag("--version", FLUXSPIN_VERSION);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << FLUXSPIN_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
    if (command_name(config.command) != command)
      throw ConfigError("command", "config is for '" + command_name(config.command) + "', not '" + command + "'");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (seed) config.seed = *seed;
  if (workers) config.workers = *workers;
  if (plot) config.plot = true;
  if (out_dir) config.out_dir = *out_dir;

  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  CommandOutput result;
  try {
    result = run_command(config);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const int code = completion_code(result.valid_points, result.total_points);

  json envelope = {{"envelope_version", 1},
                   {"tool_version", FLUXSPIN_VERSION},
                   {"config", to_json(config)},
                   {"metadata", {{"started_at", started_at}, {"wall_seconds", wall}}},
                   {"status",
                    {{"valid_points", result.valid_points},
                     {"total_points", result.total_points},
                     {"failures", result.failures},
                     {"exit_code", code}}},
                   {"payload", result.payload}};

  const std::filesystem::path dir(config.out_dir);
  const std::string stem = command_name(config.command);
  try {
    write_file(dir / (stem + ".csv"), result.table.str());
    write_file(dir / (stem + ".json"), dump_json(envelope));
    if (result.svg) write_file(dir / (stem + ".svg"), *result.svg);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  out << result.summary << "\n";
  if (code == kExitPartial)
    err << "warning: only " << result.valid_points << " of " << result.total_points << " points are valid\n";
  return code;
}

}  // namespace fluxspin::cli
