#pragma once

// Command orchestration behind the `homog` executable.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "homog/config.hpp"
#include "homog/diffusion.hpp"

namespace homog {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitStatistics = 4,
};

const std::vector<std::string>& command_names();

struct RunOptions {
  std::string command;
  std::filesystem::path config;
  bool strict = false;   // statistical check failures exit with 4
  bool force = false;    // write into output.directory itself
  std::optional<std::filesystem::path> output;  // overrides output.directory
};

/// Runs one command and returns its exit code. Reports go to a fresh
/// timestamped directory below the output directory unless `force`.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

/// Prints every diagnostic; 0 when there are no errors, 2 otherwise.
int validate(const std::filesystem::path& config, std::ostream& out);

/// The Monte Carlo part of a report: invariance scales, time-change
/// constant, bracket, excursion and density checks.
McReport monte_carlo_report(const ExperimentConfig& cfg, const PathModel& model, const DiffusivityMatrix& sigma,
                            const CorrectorSolution& sol);

/// Names of failed checks in a report (empty when all pass).
std::vector<std::string> failed_checks(const McReport& report);

}  // namespace homog
