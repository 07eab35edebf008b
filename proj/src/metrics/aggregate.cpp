#include "capax/metrics/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "capax/util/error.hpp"

namespace capax::metrics {

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MetricSummary summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::InvalidArgument, "summary of empty sample");
  MetricSummary s;
  s.n_runs = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.median = quantile(values, 0.5);
  s.iqr_low = quantile(values, 0.25);
  s.iqr_high = quantile(values, 0.75);
  return s;
}

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::test_dice: return "test_dice";
    case Metric::test_loss: return "test_loss";
    case Metric::val_dice: return "val_dice";
    case Metric::val_loss: return "val_loss";
  }
  return "test_dice";
}

Metric metric_from_string(std::string_view text) {
  if (text == "test_dice" || text == "dice") return Metric::test_dice;
  if (text == "test_loss" || text == "bce" || text == "loss") return Metric::test_loss;
  if (text == "val_dice") return Metric::val_dice;
  if (text == "val_loss") return Metric::val_loss;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(text) + "'");
}

std::optional<double> metric_value(const grid::RunRecord& record, Metric metric) {
  if (!record.result.final_metrics) return std::nullopt;
  const auto& f = *record.result.final_metrics;
  switch (metric) {
    case Metric::test_dice: return f.test_dice;
    case Metric::test_loss: return f.test_loss;
    case Metric::val_dice: return f.val_dice;
    case Metric::val_loss: return f.val_loss;
  }
  return std::nullopt;
}

std::optional<std::string> model_dataset_key(const grid::RunRecord& record) {
  return std::string(grid::model_name(record.spec.condition)) + "/" +
         std::to_string(grid::dev_images(record.spec.condition));
}

std::map<std::string, MetricSummary> aggregate(std::span<const grid::RunRecord> results, const GroupKey& group_by,
                                               Metric metric) {
  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : results) {
    const auto value = metric_value(r, metric);
    if (!value) continue;
    auto key = group_by(r);
    if (!key) continue;
    groups[*key].push_back(*value);
  }
  std::map<std::string, MetricSummary> out;
  for (const auto& [key, values] : groups)
    if (!values.empty()) out.emplace(key, summarize(values));
  return out;
}

}  // namespace capax::metrics
