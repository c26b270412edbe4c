#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "wentzell/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Strongly damped wave equation with dynamic Wentzell boundary "
               "conditions: assembly, spectra, balance checks and Galerkin "
               "simulation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON configuration file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", seed, "RNG seed (overrides config)")
        ->each([&](const std::string&) { seed_given = true; });
  };

  for (const char* name : {"eig", "simulate", "balance", "poincare", "bvp", "converge"})
    add_common(app.add_subcommand(name));

  CLI11_PARSE(app, argc, argv);

  try {
    const wentzell::RunConfig config = wentzell::parse_config(config_path);
    const wentzell::Command command =
        wentzell::parse_command(app.get_subcommands().front()->get_name());
    const std::optional<std::string> out =
        out_dir.empty() ? std::nullopt : std::make_optional(out_dir);
    const std::optional<std::uint64_t> seed_opt =
        seed_given ? std::make_optional(seed) : std::nullopt;

    const wentzell::RunSummary summary = wentzell::run(config, command, out, seed_opt);
    for (const auto& check : summary.checks)
      std::cout << (check.passed ? "[pass] " : "[FAIL] ") << check.name << ": "
                << check.detail << "\n";
    std::cout << "digest " << summary.input_digest << ", artifacts in "
              << out.value_or(config.output.directory) << "\n";
    return summary.ok() ? 0 : 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
