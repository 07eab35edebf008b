#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace capax::grid {

enum class Family { EfficientNet, ResNet, VGG };

/// Long (deeper) or short version of a family.
enum class ModelSize { Long, Short };

std::string_view to_string(Family family);
std::string_view to_string(ModelSize size);
Family family_from_string(std::string_view text);
ModelSize model_size_from_string(std::string_view text);

/// One cell of the factorial design.
struct ExperimentCondition {
  Family family = Family::EfficientNet;
  ModelSize size = ModelSize::Long;
  std::size_t dataset_size = 0;  // total images, dev + test
  double lr = 1e-3;
  double reg = 1e-6;

  bool operator==(const ExperimentCondition&) const = default;
};

/// B5/B0, R50/R18, V19/V16.
std::string_view model_name(Family family, ModelSize size);
std::string_view model_name(const ExperimentCondition& c);

/// Inverse of model_name; throws UnknownLevel.
std::pair<Family, ModelSize> parse_model(std::string_view name);

inline constexpr double kDevFraction = 0.8;

/// Development-set image count of the condition's dataset.
std::size_t dev_images(const ExperimentCondition& c, double dev_fraction = kDevFraction);

struct RunSpec {
  std::string run_id;
  ExperimentCondition condition;
  int fold = 0;
  int max_epochs = 50;
  int patience = 5;
  std::uint64_t seed = 0;

  bool operator==(const RunSpec&) const = default;
};

/// Stable 16-hex-digit id of (condition, fold, seed).
std::string make_run_id(const ExperimentCondition& c, int fold, std::uint64_t seed);

RunSpec make_run_spec(const ExperimentCondition& c, int fold, std::uint64_t seed, int max_epochs = 50,
                      int patience = 5);

struct EpochReport {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_dice = 0.0;

  bool operator==(const EpochReport&) const = default;
};

enum class RunStatus { completed, failed, stopped_early };

std::string_view to_string(RunStatus status);
RunStatus run_status_from_string(std::string_view text);

/// Metrics at the best-validation-loss epoch.
struct FinalMetrics {
  int best_epoch = 0;
  double val_loss = 0.0;
  double val_dice = 0.0;
  double test_loss = 0.0;
  double test_dice = 0.0;

  bool operator==(const FinalMetrics&) const = default;
};

struct RunResult {
  std::string run_id;
  std::vector<EpochReport> epochs;
  RunStatus status = RunStatus::failed;
  std::optional<FinalMetrics> final_metrics;  // present iff status != failed
  std::string diagnostic;

  bool finished() const { return status != RunStatus::failed; }
  bool operator==(const RunResult&) const = default;
};

/// One registry line: what was run and how it ended.
struct RunRecord {
  RunSpec spec;
  RunResult result;

  bool operator==(const RunRecord&) const = default;
};

}  // namespace capax::grid
