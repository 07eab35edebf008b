#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "capax/grid/types.hpp"

namespace capax::metrics {

struct MetricSummary {
  double mean = 0.0;
  double median = 0.0;
  double iqr_low = 0.0;
  double iqr_high = 0.0;
  std::size_t n_runs = 0;

  bool operator==(const MetricSummary&) const = default;
};

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::span<const double> values, double q);

/// Mean, median and interquartile bounds of a non-empty sample.
MetricSummary summarize(std::span<const double> values);

enum class Metric { test_dice, test_loss, val_dice, val_loss };

std::string_view to_string(Metric metric);
Metric metric_from_string(std::string_view text);

/// Metric value of a finished run, nullopt for failed runs.
std::optional<double> metric_value(const grid::RunRecord& record, Metric metric);

using GroupKey = std::function<std::optional<std::string>(const grid::RunRecord&)>;

/// Group key "<model>/<dev images>" used for the per-cell summaries.
std::optional<std::string> model_dataset_key(const grid::RunRecord& record);

/// Summaries per group; failed runs and groups left empty are dropped.
std::map<std::string, MetricSummary> aggregate(std::span<const grid::RunRecord> results, const GroupKey& group_by,
                                               Metric metric);

}  // namespace capax::metrics
