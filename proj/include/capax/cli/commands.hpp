#pragma once

#include <atomic>
#include <ostream>

#include "capax/cli/config.hpp"
#include "capax/util/error.hpp"

namespace capax::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitRunFailures = 1,
  kExitBadInput = 2,
  kExitInfeasible = 3,
};

/// Exit code for an error escaping a subcommand.
int exit_code_for(ErrorCode code);

/// Writes the manifest and prints per-size dev/test/fold counts.
int cmd_plan(const StudyConfig& config, std::ostream& out, std::ostream& err);

/// Runs every pending grid run. Exit 1 when any run failed or `cancel` was
/// raised, 2 when the manifest is missing or does not cover the grid.
int cmd_run(const StudyConfig& config, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* cancel = nullptr);

/// Fits the registry's finished runs and writes the analysis bundle to
/// config.out. Exit 3 when the design is rank deficient or too small.
int cmd_analyze(const StudyConfig& config, std::ostream& out, std::ostream& err);

/// Writes the plot-data tables next to the bundle in config.out.
int cmd_report(const StudyConfig& config, std::ostream& out, std::ostream& err);

}  // namespace capax::cli
