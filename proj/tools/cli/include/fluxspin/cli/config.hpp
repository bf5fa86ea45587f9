#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fluxspin/decay.hpp"
#include "fluxspin/errors.hpp"
#include "fluxspin/fluctuator.hpp"
#include "fluxspin/master_equation.hpp"
#include "fluxspin/nv.hpp"

namespace fluxspin::cli {

inline constexpr int kSchemaVersion = 1;

// Schema violation. `key` is the dotted path of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Command { Simulate, Crossover, Fig2, McValidate, Sweetspot };

std::string command_name(Command c);
std::optional<Command> parse_command(const std::string& name);

// rates[i][j] is the rate from state j to state i.
struct FluctuatorConfig {
  std::vector<std::vector<double>> rates;
  std::vector<std::array<double, 3>> omegas;
  std::vector<std::string> labels;

  FluctuatorSpec build() const;
};

// Occupation as written in the file: "ground", "stationary" or a list of
// probabilities.
struct OccupationConfig {
  std::string kind = "ground";
  std::vector<double> probabilities;

  Occupation build() const;
};

// points == 0 selects the library's default grid.
struct TimeGridConfig {
  double t_end = 0.0;
  int points = 0;
};

struct SimulateConfig {
  FluctuatorConfig fluctuator;
  std::array<double, 3> initial_spin{1.0, 0.0, 0.0};
  OccupationConfig occupation;
  TimeGridConfig grid;
};

struct CrossoverConfig {
  double rate_ba = 0.5;
  double rate_ab = 0.5;
  std::array<double, 3> mean_omega{0.0, 0.0, 0.0};
  std::array<double, 3> direction{0.0, 0.0, 1.0};
  std::array<double, 3> initial_spin{1.0, 0.0, 0.0};
  OccupationConfig occupation{"stationary", {}};
  // Log-spaced delta omega grid in units of r_tot, unless `values` (rad/us) is given.
  double min_over_rate = 1e-3;
  double max_over_rate = 1e2;
  int points = 51;
  std::vector<double> values;

  CrossoverTemplate build() const;
  std::vector<double> grid() const;
};

struct Fig2Config {
  int n_states = 3;
  double sigma_omega_ratio = 2.5;
  double gamma_rad = 86.0;
  double excitation_rate = 86.0;
  int n_realizations = 50;
  OccupationConfig occupation;
  double gamma0_offset = 3.4e-3;
  double gamma_dark = 3e-4;
  bool resample_per_point = false;
  // Log-spaced w_g grid in units of gamma_rad, unless `values` (rad/us) is given.
  double min_over_gamma = 0.005;
  double max_over_gamma = 0.22;
  int points = 20;
  std::vector<double> values;

  EnsembleSpec build(std::uint64_t seed) const;
  std::vector<double> grid() const;
};

struct McValidateConfig {
  FluctuatorConfig fluctuator;
  std::array<double, 3> initial_spin{1.0, 0.0, 0.0};
  OccupationConfig occupation;
  // t_end == 0 uses the span of the default analysis grid.
  TimeGridConfig grid{0.0, 41};
  std::uint64_t trajectories = 20000;
  double threshold_se = 4.0;
};

struct SweetspotConfig {
  FluctuatorConfig fluctuator;
  OccupationConfig occupation;
};

using CommandParams = std::variant<SimulateConfig, CrossoverConfig, Fig2Config, McValidateConfig, SweetspotConfig>;

struct RunConfig {
  int schema_version = kSchemaVersion;
  Command command = Command::Simulate;
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 0;
  std::string out_dir = ".";
  bool plot = false;
  CommandParams params;
};

// Parses and validates a config document. A result envelope is accepted as
// well; its echoed "config" member is used. Throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

// Fully resolved config, defaults included. parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

}  // namespace fluxspin::cli
