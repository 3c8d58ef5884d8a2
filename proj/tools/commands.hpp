#pragma once

#include "config.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace isolab::cli {

enum ExitCode : int { kPass = 0, kInvariantFailure = 2, kConfigError = 3, kSolverFailure = 4 };

struct CommandResult {
  std::string name;
  nlohmann::json report;  // header, status, checks and payload
  int exit_code = kPass;
};

struct RunContext {
  unsigned jobs = 1;
  std::string fit_input;  // sweep CSV for `fit`; empty runs a sweep
};

inline const std::vector<std::string> kSubcommands{"potential", "spectrum", "sweep", "fit",  "hadamard",
                                                   "rescale",   "agmon",    "hermite", "all"};

/// Runs one subcommand, writing its files into the output directory.
/// Solver failures are caught and reported with exit code 4.
CommandResult run(const std::string& subcommand, const RunConfig& config, const RunContext& ctx);

/// One-line JSON failure report for stderr.
nlohmann::json failure_report(const CommandResult& r);

}  // namespace isolab::cli
