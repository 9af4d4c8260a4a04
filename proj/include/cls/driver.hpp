#pragma once

// Command orchestration behind the cls-solver verbs. Each verb writes its artifacts
// and a manifest.json into config.output_dir and returns a process exit code.

#include <iosfwd>

#include "cls/run_config.hpp"

namespace cls {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitBand = 4,
};

/// Runs the selected scheme; writes trajectory.csv, error_field.csv when a comparison
/// scheme is set, and wpt_field.csv when requested for a cls run.
int run_solve(const RunConfig& config, std::ostream& log);

/// Runs the configured sweep; writes convergence.csv and convergence_times.csv.
int run_sweep(const RunConfig& config, std::ostream& log);

/// Skew-Hermitian residual of the central-gradient generator plus the stability report.
int run_check(const RunConfig& config, std::ostream& log);

/// Reads the config text recorded in a manifest.
RunConfig config_from_manifest(const std::filesystem::path& manifest);

}  // namespace cls
