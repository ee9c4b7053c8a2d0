#include <string>

#include "CLI11.hpp"

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tbsm - tight-binding billiard S-matrix toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_path, format = "csv";
  const std::pair<const char*, const char*> commands[] = {
      {"sweep", "transmission/conductance sweep over an energy grid"},
      {"poles", "S-matrix poles (effective-Hamiltonian eigenvalues)"},
      {"track", "pole trajectories along a coupling or energy path"},
      {"validate", "pipeline vs oracle vs analytic cross-checks"},
  };
  for (const auto& [name, description] : commands) {
    CLI::App* sub = app.add_subcommand(name, description);
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_path, "output table path")->required();
    sub->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tbsm::cli::kExitUsage;
  }

  return tbsm::cli::run_command(app.get_subcommands().front()->get_name(), config_path, out_path,
                                format);
}
