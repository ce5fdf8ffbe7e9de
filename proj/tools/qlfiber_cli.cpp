#include <iostream>

#include <CLI11.hpp>

#include "qlfiber/scenario.hpp"

namespace {

using qlfiber::cli::ScenarioKind;

const char* describe(ScenarioKind kind)
{
  switch (kind) {
    case ScenarioKind::Simulate:
      return "propagate a field through an index profile";
    case ScenarioKind::Gate:
      return "extract the logical gate of a profile on a code";
    case ScenarioKind::Synth:
      return "search for a profile or rotation sequence realizing a target";
    case ScenarioKind::Reachability:
      return "Lie-closure dimensions of generator sets on a code";
    case ScenarioKind::Lattice:
      return "tabulate von Neumann lattice labels";
  }
  return "";
}

}  // namespace

int main(int argc, char** argv)
{
  using namespace qlfiber::cli;
  CLI::App app{"qlfiber: paraxial fiber propagation, qulbit gates and profile synthesis"};
  app.require_subcommand(1);

  Scenario scenario;
  std::string config, out = ".";
  for (auto kind : {ScenarioKind::Simulate, ScenarioKind::Gate, ScenarioKind::Synth, ScenarioKind::Reachability,
                    ScenarioKind::Lattice}) {
    auto* sub = app.add_subcommand(to_string(kind), describe(kind));
    sub->add_option("--config", config, "scenario JSON")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", scenario.overrides.seed, "optimizer seed");
    sub->add_option("--grid-points", scenario.overrides.grid_points, "grid points per axis");
    sub->add_option("--cutoff", scenario.overrides.cutoff, "Fock cutoff per mode");
    sub->add_option("--dz", scenario.overrides.dz, "propagation step (um)");
    sub->callback([&scenario, kind] { scenario.kind = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  scenario.config = config;
  scenario.out_dir = out;
  return run(scenario, std::cerr, log_level_from_env());
}
