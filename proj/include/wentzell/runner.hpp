#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wentzell/config.hpp"

namespace wentzell {

enum class Command { Eig, Simulate, Balance, Poincare, Bvp, Converge };

Command parse_command(const std::string& name);
std::string command_name(Command cmd);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunSummary {
  std::string command;
  std::string input_digest;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<std::pair<std::string, std::string>> labels;
  std::vector<std::string> artifacts;

  bool ok() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Executes one command: assemble, solve, write artifacts under the output
/// directory, and return the summary (also written as summary.json). Output
/// bytes depend only on (config, seed).
RunSummary run(const RunConfig& config, Command command,
               const std::optional<std::string>& out_dir = std::nullopt,
               const std::optional<std::uint64_t>& seed_override = std::nullopt);

}  // namespace wentzell
