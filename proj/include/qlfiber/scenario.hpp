// Scenario runner behind the qlfiber command line tool.
//
// Each scenario is one JSON config file. Relative paths inside it resolve
// against the config's directory. Exit status: 0 success, 1 validation error,
// 2 numerical failure. QLFIBER_LOG=quiet|warn|info sets stderr verbosity
// (default warn).
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace qlfiber::cli {

enum class ScenarioKind { Simulate, Gate, Synth, Reachability, Lattice };

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(const std::string& name);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_points;
  std::optional<int> cutoff;
  std::optional<double> dz;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::Simulate;
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  Overrides overrides;
};

enum class LogLevel { Quiet, Warn, Info };

LogLevel log_level_from_env();

// Runs one scenario; diagnostics go to `err`.
int run(const Scenario& scenario, std::ostream& err, LogLevel level = LogLevel::Warn);

}  // namespace qlfiber::cli
