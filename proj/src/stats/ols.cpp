#include "capax/stats/ols.hpp"

#include <cmath>
#include <numbers>

#include "capax/util/error.hpp"

namespace capax::stats {

double gaussian_loglik(double n, double ssr) {
  return -0.5 * n * (std::log(2.0 * std::numbers::pi) + std::log(ssr / n) + 1.0);
}

double gaussian_aic(double n, double p, double ssr) { return 2.0 * p - 2.0 * gaussian_loglik(n, ssr); }

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

Eigen::VectorXd inverse_gram_diagonal(const Eigen::MatrixXd& X) {
  const Eigen::Index p = X.cols();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  // (X'X)^-1 = P R^-1 R^-T P'
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::VectorXd diag_perm = r_inv.rowwise().squaredNorm();
  Eigen::VectorXd diag(p);
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = 0; k < p; ++k) diag[perm[k]] = diag_perm[k];
  return diag;
}

LinearFit ols_fit(const DesignMatrix& dm) {
  const Eigen::Index n = dm.n();
  const Eigen::Index p = dm.p();
  if (n <= p) throw RankDeficient(dm.labels, "need more observations than columns");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.X);
  if (qr.rank() < p) {
    std::vector<std::string> cols;
    for (Eigen::Index k = qr.rank(); k < p; ++k)
      cols.push_back(dm.labels[static_cast<std::size_t>(qr.colsPermutation().indices()[k])]);
    throw RankDeficient(cols, "design matrix is rank deficient");
  }

  LinearFit fit;
  fit.labels = dm.labels;
  fit.n = n;
  fit.p = p;
  fit.beta = qr.solve(dm.y);
  fit.fitted = dm.X * fit.beta;
  fit.ssr = (dm.y - fit.fitted).squaredNorm();
  fit.sigma2 = fit.ssr / static_cast<double>(n - p);

  const Eigen::VectorXd diag = inverse_gram_diagonal(dm.X);
  fit.se = (diag * fit.sigma2).cwiseSqrt();
  fit.z = fit.beta.cwiseQuotient(fit.se);
  fit.p_values.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) fit.p_values[k] = normal_two_sided_p(fit.z[k]);
  fit.loglik = gaussian_loglik(static_cast<double>(n), fit.ssr);
  fit.aic = gaussian_aic(static_cast<double>(n), static_cast<double>(p), fit.ssr);
  return fit;
}

}  // namespace capax::stats
