#include "capax/grid/study.hpp"

#include <algorithm>
#include <mutex>
#include <thread>

#include "capax/grid/supervisor.hpp"
#include "capax/util/error.hpp"

namespace capax::grid {

std::vector<RunSpec> schedule(std::span<const ExperimentCondition> conditions, const RunRegistry& registry,
                              const ScheduleOptions& options) {
  if (options.k_folds < 1) throw Error(ErrorCode::InvalidArgument, "k_folds must be positive");
  std::vector<RunSpec> pending;
  for (const auto& c : conditions)
    for (int fold = 0; fold < options.k_folds; ++fold) {
      auto spec = make_run_spec(c, fold, options.seed, options.max_epochs, options.patience);
      if (!registry.is_finished(spec.run_id)) pending.push_back(std::move(spec));
    }
  return pending;
}

StudySummary run_study(const plan::DatasetPlan* plan, const StudyOptions& options,
                       const std::atomic<bool>* cancel) {
  if (!options.trainer) throw Error(ErrorCode::InvalidConfig, "no trainer configured");
  if (options.parallelism == 0) throw Error(ErrorCode::InvalidConfig, "parallelism must be at least 1");

  const auto conditions = expand_grid(options.grid);
  if (plan) {
    const auto sizes = plan->dataset_sizes();
    for (auto size : options.grid.dataset_sizes)
      if (std::find(sizes.begin(), sizes.end(), size) == sizes.end())
        throw Error(ErrorCode::InvalidConfig, "dataset size " + std::to_string(size) + " is not in the manifest");
    if (plan->k_folds != options.schedule.k_folds)
      throw Error(ErrorCode::InvalidConfig, "manifest has " + std::to_string(plan->k_folds) + " folds, study asks for " +
                                                std::to_string(options.schedule.k_folds));
  }

  const auto registry = RunRegistry::load(options.registry_path);
  auto pending = schedule(conditions, registry, options.schedule);

  StudySummary summary;
  summary.previously_finished = conditions.size() * static_cast<std::size_t>(options.schedule.k_folds) - pending.size();
  summary.scheduled = pending.size();
  if (options.max_runs && *options.max_runs < pending.size()) pending.resize(*options.max_runs);

  RegistryWriter writer(options.registry_path);
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  StudyProgress progress{0, 0, pending.size()};
  std::exception_ptr fatal;

  SupervisorOptions sup;
  sup.manifest_path = options.manifest_path;
  sup.epoch_timeout = options.epoch_timeout;
  sup.cancel = cancel;

  auto worker = [&] {
    for (;;) {
      if (cancel && cancel->load()) return;
      const std::size_t index = next.fetch_add(1);
      if (index >= pending.size()) return;
      const RunSpec& spec = pending[index];

      RunResult result;
      try {
        auto channel = options.trainer();
        result = supervise_run(spec, *channel, sup);
      } catch (const std::exception& e) {
        result.run_id = spec.run_id;
        result.status = RunStatus::failed;
        result.diagnostic = std::string("trainer spawn failed: ") + e.what();
      }
      if (result.status == RunStatus::failed && result.diagnostic == kCancelledDiagnostic) return;

      RunRecord record{spec, std::move(result)};
      try {
        writer.append(record);
      } catch (...) {
        std::lock_guard lock(progress_mutex);
        if (!fatal) fatal = std::current_exception();
        return;
      }
      std::lock_guard lock(progress_mutex);
      ++progress.done;
      --progress.pending;
      if (!record.result.finished()) ++progress.failed;
      if (options.on_record) options.on_record(record, progress);
    }
  };

  const std::size_t n_workers = std::min(options.parallelism, std::max<std::size_t>(pending.size(), 1));
  std::vector<std::jthread> workers;
  workers.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) workers.emplace_back(worker);
  workers.clear();

  if (fatal) std::rethrow_exception(fatal);
  summary.executed = progress.done;
  summary.failed = progress.failed;
  summary.interrupted = cancel && cancel->load();
  return summary;
}

}  // namespace capax::grid
