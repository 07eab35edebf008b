#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace capax::stats {

struct HsdGroupData {
  std::string label;
  std::vector<double> values;
};

struct HsdResult {
  std::vector<std::string> groups;
  std::vector<double> means;
  std::vector<std::size_t> n_per_group;
  double mse = 0.0;  // pooled within-group variance
  int df = 0;        // N - k
  double confidence = 0.95;
  double q_crit = 0.0;
  /// Halfwidth of each group's interval; with equal group sizes two
  /// intervals overlap exactly when the pair is not significant.
  std::vector<double> ci_halfwidth;
  /// significant[i][j]: |mean_i - mean_j| exceeds the pair's HSD threshold.
  std::vector<std::vector<bool>> significant;
  /// Unequal group sizes: pairwise tests use Tukey-Kramer and the per-group
  /// intervals are only approximate.
  bool approximate = false;

  std::size_t k() const { return groups.size(); }
  /// |mean_i - mean_j| <= halfwidth_i + halfwidth_j.
  bool intervals_overlap(std::size_t i, std::size_t j) const;
};

/// Tukey HSD over the given groups (at least two, each non-empty, N > k).
HsdResult tukey_hsd(const std::vector<HsdGroupData>& groups, double confidence = 0.95);

}  // namespace capax::stats
