#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "capax/grid/channel.hpp"
#include "capax/grid/condition.hpp"
#include "capax/grid/registry.hpp"
#include "capax/plan/splits.hpp"

namespace capax::grid {

struct ScheduleOptions {
  int k_folds = 5;
  int max_epochs = 50;
  int patience = 5;
  std::uint64_t seed = 0;
};

/// condition x fold specs in grid order, minus runs the registry already
/// holds as finished. Failed runs are scheduled again.
std::vector<RunSpec> schedule(std::span<const ExperimentCondition> conditions, const RunRegistry& registry,
                              const ScheduleOptions& options = {});

struct StudyProgress {
  std::size_t done = 0;
  std::size_t failed = 0;
  std::size_t pending = 0;
};

struct StudyOptions {
  GridConfig grid;
  ScheduleOptions schedule;
  std::filesystem::path registry_path;
  std::string manifest_path;
  ChannelFactory trainer;
  std::size_t parallelism = 1;
  std::chrono::milliseconds epoch_timeout{std::chrono::hours(1)};
  /// Stop scheduling after this many runs (resume testing, partial studies).
  std::optional<std::size_t> max_runs;
  std::function<void(const RunRecord&, const StudyProgress&)> on_record;
};

struct StudySummary {
  std::size_t previously_finished = 0;
  std::size_t scheduled = 0;  // pending at start
  std::size_t executed = 0;   // records appended by this invocation
  std::size_t failed = 0;     // failed among executed
  bool interrupted = false;
};

/// Executes every pending run with at most `parallelism` trainers at once,
/// appending one record per run to the registry file. Per-run failures are
/// recorded and do not abort the study. When `plan` is given, every grid
/// dataset size must exist in it.
StudySummary run_study(const plan::DatasetPlan* plan, const StudyOptions& options,
                       const std::atomic<bool>* cancel = nullptr);

}  // namespace capax::grid
