#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capax/grid/types.hpp"

namespace capax::stats {

/// How the dataset, lr and reg covariates enter the formula.
enum class Covariates {
  log,       // DICE ~ ls + ls:Family + log(Dataset) + log(lr):ls:Family + log(reg)
  identity,  // covariates untransformed, paired with a log link
};

/// The model formula. Term order is fixed (sequential ANOVA depends on it);
/// treatment baselines are ls=long and Family=EfficientNet.
struct FormulaSpec {
  Covariates covariates = Covariates::log;
  /// Allowed levels; an observation outside a non-empty list is UnknownLevel.
  std::vector<std::size_t> dataset_levels;
  std::vector<double> lr_levels;
  std::vector<double> reg_levels;

  static FormulaSpec standard() { return {}; }
  static FormulaSpec log_link_alternative() { return {Covariates::identity, {}, {}, {}}; }
};

struct Observation {
  grid::ExperimentCondition condition;
  double response = 0.0;
};

/// Encoded formula. Columns are grouped into terms (intercept first);
/// term_of_column maps each column to its index in term_names.
struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> labels;
  std::vector<std::string> term_names;
  std::vector<int> term_of_column;
  /// Columns removed because the grid gives them no variation.
  std::vector<std::string> dropped;

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
};

/// Full 14-column label set of a formula, before any dropping.
std::vector<std::string> full_labels(Covariates covariates);

/// Builds X and y. Columns a degenerate grid cannot identify (single-level
/// factors, absent cells) are dropped and listed in `dropped`; any remaining
/// collinearity throws RankDeficient naming the offending columns.
DesignMatrix build_design_matrix(std::span<const Observation> observations, const FormulaSpec& formula);

}  // namespace capax::stats
