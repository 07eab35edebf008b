#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "capax/grid/condition.hpp"
#include "capax/metrics/aggregate.hpp"
#include "capax/plan/splits.hpp"
#include "capax/synth/surface.hpp"

namespace capax::cli {

/// Trainer command that selects the in-process synthetic trainer.
inline constexpr std::string_view kBuiltinSynthetic = "builtin:synthetic";

struct StudyConfig {
  std::filesystem::path manifest = "manifest.json";
  /// Patient inventory for `plan`; empty means a seeded synthetic inventory.
  std::filesystem::path inventory;
  std::size_t synthetic_patients = 100;
  std::filesystem::path registry = "registry.ndjson";
  std::filesystem::path out = "analysis";

  std::string trainer{kBuiltinSynthetic};
  std::size_t parallelism = 1;
  std::uint64_t plan_seed = 0;
  std::uint64_t run_seed = 0;

  double dev_fraction = 0.8;
  std::size_t images_per_patient = 100;
  int k_folds = 5;
  plan::FoldMode fold_mode = plan::FoldMode::automatic;

  grid::GridConfig grid;

  int max_epochs = 50;
  int patience = 5;
  std::chrono::milliseconds epoch_timeout{std::chrono::hours(1)};

  double synthetic_sigma = std::sqrt(23.7779 / 1606.0);
  synth::ClampMode synthetic_mode = synth::ClampMode::raw;

  metrics::Metric response = metrics::Metric::test_dice;
  double confidence = 0.95;

  /// Stop after this many runs; command-line only.
  std::optional<std::size_t> max_runs;

  plan::PlanOptions plan_options() const;
  synth::ResponseSurface surface() const;
};

/// Text of the configuration schema.
std::string_view study_config_schema();

/// Violations of `doc` against a schema, as "<json pointer>: <problem>".
/// Supports the keywords the configuration schema uses: type, enum,
/// properties, additionalProperties (false), items, minItems, minLength,
/// minimum, exclusiveMinimum, exclusiveMaximum.
std::vector<std::string> schema_violations(const nlohmann::json& doc, const nlohmann::json& schema);

/// Validates against the schema, then builds the config. Relative paths are
/// resolved against `base_dir`. Throws InvalidConfig.
StudyConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

/// Reads and validates a config file; paths resolve against its directory.
StudyConfig load_config(const std::filesystem::path& path);

/// Command-line settings layered over the file.
struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::vector<std::size_t>> sizes;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  std::optional<std::string> response;
  std::optional<std::string> trainer;
  std::optional<std::filesystem::path> registry;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::size_t> max_runs;
};

/// Defaults, then the config file, then `env_trainer` (CAPAX_TRAINER), then
/// the flags. --seed sets both the plan and run seeds.
StudyConfig resolve_config(const Overrides& overrides, const char* env_trainer);

}  // namespace capax::cli
