#include "capax/stats/hsd.hpp"

#include <cmath>
#include <algorithm>
#include <numeric>

#include "capax/stats/studentized_range.hpp"
#include "capax/util/error.hpp"

namespace capax::stats {

bool HsdResult::intervals_overlap(std::size_t i, std::size_t j) const {
  return std::abs(means[i] - means[j]) <= ci_halfwidth[i] + ci_halfwidth[j];
}

HsdResult tukey_hsd(const std::vector<HsdGroupData>& groups, double confidence) {
  if (groups.size() < 2) throw Error(ErrorCode::InvalidArgument, "HSD needs at least two groups");
  HsdResult r;
  r.confidence = confidence;
  std::size_t total = 0;
  double within = 0.0;
  for (const auto& g : groups) {
    if (g.values.empty()) throw Error(ErrorCode::InvalidArgument, "HSD group " + g.label + " is empty");
    const double mean = std::accumulate(g.values.begin(), g.values.end(), 0.0) / static_cast<double>(g.values.size());
    for (double v : g.values) within += (v - mean) * (v - mean);
    r.groups.push_back(g.label);
    r.means.push_back(mean);
    r.n_per_group.push_back(g.values.size());
    total += g.values.size();
  }
  const std::size_t k = groups.size();
  if (total <= k) throw Error(ErrorCode::InvalidArgument, "HSD needs more observations than groups");
  r.df = static_cast<int>(total - k);
  r.mse = within / r.df;
  r.q_crit = q_studentized(confidence, static_cast<int>(k), r.df);

  const std::size_t n0 = r.n_per_group.front();
  r.approximate = std::any_of(r.n_per_group.begin(), r.n_per_group.end(), [&](std::size_t n) { return n != n0; });

  r.ci_halfwidth.resize(k);
  for (std::size_t i = 0; i < k; ++i)
    r.ci_halfwidth[i] = 0.5 * (r.q_crit * std::sqrt(r.mse / static_cast<double>(r.n_per_group[i])));

  r.significant.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      double threshold;
      if (r.approximate) {
        const double ni = static_cast<double>(r.n_per_group[i]);
        const double nj = static_cast<double>(r.n_per_group[j]);
        threshold = r.q_crit * std::sqrt(0.5 * r.mse * (1.0 / ni + 1.0 / nj));
      } else {
        // the same expression the halfwidths are built from
        threshold = r.q_crit * std::sqrt(r.mse / static_cast<double>(n0));
      }
      r.significant[i][j] = std::abs(r.means[i] - r.means[j]) > threshold;
    }
  return r;
}

}  // namespace capax::stats
