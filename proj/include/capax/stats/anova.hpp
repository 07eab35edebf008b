#pragma once

#include <span>
#include <string>
#include <vector>

#include "capax/stats/design.hpp"

namespace capax::stats {

struct TermSumOfSquares {
  std::string term;
  double ss = 0.0;
  int df = 0;
};

struct AnovaRow {
  std::string term;
  double ss = 0.0;
  int df = 0;
  double f = 0.0;
  double p_value = 1.0;
  double eta2 = 0.0;          // ss / ss_total
  double partial_eta2 = 0.0;  // ss / (ss + residual ss)

  bool operator==(const AnovaRow&) const = default;
};

struct AnovaTable {
  std::vector<AnovaRow> terms;
  double residual_ss = 0.0;
  int residual_df = 0;
  double residual_eta2 = 0.0;
  double ss_total = 0.0;  // sum of term SS plus residual SS

  bool operator==(const AnovaTable&) const = default;
};

/// F, p and effect sizes from term sums of squares and the residual row.
AnovaTable anova_from_sums(std::span<const TermSumOfSquares> terms, double residual_ss, int residual_df);

/// Sequential (type I) sums of squares in the design's term order: each term
/// is credited with the drop in residual SS when its columns join the ones
/// before it. The intercept is not reported.
std::vector<TermSumOfSquares> sequential_sums(const DesignMatrix& dm, double* residual_ss = nullptr);

AnovaTable anova(const DesignMatrix& dm);

}  // namespace capax::stats
