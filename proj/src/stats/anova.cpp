#include "capax/stats/anova.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include "capax/util/error.hpp"

namespace capax::stats {

AnovaTable anova_from_sums(std::span<const TermSumOfSquares> terms, double residual_ss, int residual_df) {
  if (residual_df < 1) throw Error(ErrorCode::InvalidArgument, "residual df must be positive");
  if (residual_ss < 0.0) throw Error(ErrorCode::InvalidArgument, "negative residual SS");
  AnovaTable table;
  table.residual_ss = residual_ss;
  table.residual_df = residual_df;
  table.ss_total = residual_ss;
  for (const auto& t : terms) table.ss_total += t.ss;

  const double residual_ms = residual_ss / residual_df;
  for (const auto& t : terms) {
    if (t.df < 1) throw Error(ErrorCode::InvalidArgument, "term " + t.term + " has no degrees of freedom");
    AnovaRow row;
    row.term = t.term;
    row.ss = t.ss;
    row.df = t.df;
    row.f = (t.ss / t.df) / residual_ms;
    if (residual_ms > 0.0) {
      boost::math::fisher_f dist(t.df, residual_df);
      row.p_value = boost::math::cdf(boost::math::complement(dist, std::max(row.f, 0.0)));
    } else {
      row.p_value = t.ss > 0.0 ? 0.0 : 1.0;
    }
    row.eta2 = table.ss_total > 0.0 ? t.ss / table.ss_total : 0.0;
    row.partial_eta2 = (t.ss + residual_ss) > 0.0 ? t.ss / (t.ss + residual_ss) : 0.0;
    table.terms.push_back(row);
  }
  table.residual_eta2 = table.ss_total > 0.0 ? residual_ss / table.ss_total : 0.0;
  return table;
}

std::vector<TermSumOfSquares> sequential_sums(const DesignMatrix& dm, double* residual_ss) {
  const Eigen::Index n = dm.n();
  const Eigen::Index p = dm.p();
  if (n <= p) throw RankDeficient(dm.labels, "need more observations than columns");
  // Unpivoted QR keeps the column order, so the squared entries of Q'y split
  // the fitted SS into sequential contributions.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(dm.X);
  const Eigen::VectorXd effects = qr.householderQ().transpose() * dm.y;

  std::vector<TermSumOfSquares> out;
  for (Eigen::Index k = 0; k < p; ++k) {
    const int term = dm.term_of_column[static_cast<std::size_t>(k)];
    if (term == 0) continue;
    const auto& name = dm.term_names[static_cast<std::size_t>(term)];
    if (out.empty() || out.back().term != name) out.push_back({name, 0.0, 0});
    out.back().ss += effects[k] * effects[k];
    ++out.back().df;
  }
  if (residual_ss) *residual_ss = effects.tail(n - p).squaredNorm();
  return out;
}

AnovaTable anova(const DesignMatrix& dm) {
  double residual = 0.0;
  const auto sums = sequential_sums(dm, &residual);
  return anova_from_sums(sums, residual, static_cast<int>(dm.n() - dm.p()));
}

}  // namespace capax::stats
