#pragma once

#include <string>

#include "taf/config.hpp"
#include "taf/evolution.hpp"

namespace taf {

/// Exit codes shared with the CLI: 0 ok, 2 config error, 3 numerical abort.
enum ExitCode : int { kExitOk = 0, kExitConfigError = 2, kExitNumericalAbort = 3 };

/// Initial state for a named scenario on the configured grid. All scenario
/// fields are band-limited by construction and keep f >= 0 and rho < 1.
ModelState build_initial_state(const RunConfig& config);

struct ScenarioResult {
  int exit_code = kExitOk;
  std::string message;
  std::string output_dir;          // resolved, after TAF_OUTPUT_ROOT
  std::string last_checkpoint;     // path of the most recent checkpoint
};

/// Execute a full scenario: run the solver with CSV/JSON sinks attached,
/// write diagnostics.csv, events.json and checkpoints under the output
/// directory; the uniqueness-pair scenario additionally writes pair.csv.
/// The environment variable TAF_OUTPUT_ROOT, when set, prefixes relative
/// output directories.
ScenarioResult run_scenario(const RunConfig& config);

/// Resolve the output directory (TAF_OUTPUT_ROOT handling), creating it.
std::string resolve_output_dir(const std::string& dir);

}  // namespace taf
