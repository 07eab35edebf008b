#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capax/grid/types.hpp"
#include "capax/metrics/aggregate.hpp"
#include "capax/stats/anova.hpp"
#include "capax/stats/design.hpp"
#include "capax/stats/hsd.hpp"
#include "capax/stats/ols.hpp"

namespace capax::cli {

struct CoefficientRow {
  std::string label;
  double coef = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p_value = 1.0;

  bool operator==(const CoefficientRow&) const = default;
};

struct ModelFit {
  std::vector<CoefficientRow> coefficients;
  std::vector<std::string> dropped;
  double ssr = 0.0;
  double loglik = 0.0;
  double aic = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;

  bool operator==(const ModelFit&) const = default;
};

/// One plot cell: a model at one dev-set size.
struct CellSummary {
  std::string model;
  std::size_t dev_images = 0;
  metrics::MetricSummary dice;
  metrics::MetricSummary loss;

  bool operator==(const CellSummary&) const = default;
};

struct HsdGroup {
  std::string model;
  std::size_t dev_images = 0;
  std::size_t n = 0;
  double mean = 0.0;
  double halfwidth = 0.0;

  bool operator==(const HsdGroup&) const = default;
};

struct HsdSection {
  double confidence = 0.95;
  double q_crit = 0.0;
  double mse = 0.0;
  int df = 0;
  bool approximate = false;
  std::vector<HsdGroup> groups;
  /// Pairs (i < j) judged significantly different.
  std::vector<std::pair<std::size_t, std::size_t>> significant_pairs;

  bool operator==(const HsdSection&) const = default;
};

struct AnalysisBundle {
  std::string response;
  std::size_t runs_used = 0;
  std::size_t runs_failed = 0;
  ModelFit primary;
  stats::AnovaTable anova;
  /// Log-link alternative on untransformed covariates; unset when IRLS failed.
  std::optional<ModelFit> alternative;
  std::string alternative_note;
  HsdSection hsd;
  std::vector<CellSummary> cells;

  bool operator==(const AnalysisBundle&) const = default;
};

/// Finished runs as regression observations on the chosen response.
std::vector<stats::Observation> observations(std::span<const grid::RunRecord> records, metrics::Metric response);

ModelFit to_model_fit(const stats::LinearFit& fit, const std::vector<std::string>& dropped);

struct AnalysisOptions {
  metrics::Metric response = metrics::Metric::test_dice;
  double confidence = 0.95;
  stats::FormulaSpec formula = stats::FormulaSpec::standard();
};

/// Full analysis of a registry's finished runs. Throws RankDeficient,
/// InvalidArgument (too few runs) and UnknownLevel.
AnalysisBundle analyze(std::span<const grid::RunRecord> records, std::size_t failed_runs,
                       const AnalysisOptions& options);

nlohmann::ordered_json bundle_to_json(const AnalysisBundle& bundle);
AnalysisBundle bundle_from_json(const nlohmann::json& doc);

/// Tab-separated coefficient, ANOVA, HSD and per-cell tables.
std::string coefficients_tsv(const AnalysisBundle& bundle);
std::string anova_tsv(const AnalysisBundle& bundle);
std::string hsd_tsv(const AnalysisBundle& bundle);
std::string cells_tsv(const AnalysisBundle& bundle);

/// Plot data for the two panels: median/IQR per model and dataset
/// for DICE and loss, and HSD means with interval halfwidths.
std::string panel_summary_tsv(const AnalysisBundle& bundle);
std::string panel_hsd_tsv(const AnalysisBundle& bundle);
/// Every HSD pair with its significance flag and interval overlap.
std::string hsd_pairs_tsv(const AnalysisBundle& bundle);

void write_bundle(const std::filesystem::path& dir, const AnalysisBundle& bundle);
AnalysisBundle read_bundle(const std::filesystem::path& dir);

}  // namespace capax::cli
