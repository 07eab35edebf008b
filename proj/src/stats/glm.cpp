#include "capax/stats/glm.hpp"

#include <algorithm>
#include <cmath>

#include "capax/util/error.hpp"

namespace capax::stats {

namespace {

// Keeps exp() finite.
constexpr double kEtaLimit = 700.0;

double deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  return (y - eta.cwiseMin(kEtaLimit).array().exp().matrix()).squaredNorm();
}

}  // namespace

LinearFit glm_log_link_fit(const DesignMatrix& dm, const GlmOptions& options) {
  const Eigen::Index n = dm.n();
  const Eigen::Index p = dm.p();
  if (n <= p) throw RankDeficient(dm.labels, "need more observations than columns");
  const Eigen::VectorXd& y = dm.y;

  // start from the data, nudging non-positive responses onto the link's domain
  double positive_mean = 0.0;
  Eigen::Index positives = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (y[i] > 0.0) {
      positive_mean += y[i];
      ++positives;
    }
  if (positives == 0) throw IrlsDiverged({}, "log link needs some positive responses");
  positive_mean /= static_cast<double>(positives);
  const double floor = 0.1 * positive_mean;
  Eigen::VectorXd eta = y.unaryExpr([&](double v) { return std::log(std::max(v, floor)); });

  std::vector<double> trace;
  double dev_prev = deviance(y, eta);
  trace.push_back(dev_prev);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  bool have_beta = false;
  bool converged = false;
  int iterations = 0;

  for (int it = 1; it <= options.max_iterations; ++it) {
    iterations = it;
    const Eigen::VectorXd mu = eta.cwiseMin(kEtaLimit).array().exp().matrix();
    // Gaussian family, log link: weight mu^2, working response eta + (y - mu)/mu
    const Eigen::VectorXd w_sqrt = mu;
    const Eigen::VectorXd z = eta + (y - mu).cwiseQuotient(mu);
    const Eigen::MatrixXd xw = w_sqrt.asDiagonal() * dm.X;
    const Eigen::VectorXd zw = w_sqrt.cwiseProduct(z);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xw);
    if (qr.rank() < p) throw IrlsDiverged(trace, "weighted design lost rank at iteration " + std::to_string(it));
    Eigen::VectorXd beta_new = qr.solve(zw);

    Eigen::VectorXd eta_new = dm.X * beta_new;
    double dev = deviance(y, eta_new);
    // step halving toward the previous coefficients when the deviance rises
    for (int half = 0; have_beta && (!std::isfinite(dev) || dev > dev_prev * (1.0 + 1e-12)) && half < 30; ++half) {
      beta_new = 0.5 * (beta_new + beta);
      eta_new = dm.X * beta_new;
      dev = deviance(y, eta_new);
    }
    if (!std::isfinite(dev)) throw IrlsDiverged(trace, "deviance became non-finite");

    beta = beta_new;
    have_beta = true;
    eta = eta_new;
    trace.push_back(dev);
    if (std::abs(dev - dev_prev) / (std::abs(dev) + 0.1) < options.tolerance) {
      converged = true;
      break;
    }
    dev_prev = dev;
  }
  if (!converged)
    throw IrlsDiverged(trace, "IRLS did not converge in " + std::to_string(options.max_iterations) + " iterations");

  LinearFit fit;
  fit.labels = dm.labels;
  fit.n = n;
  fit.p = p;
  fit.iterations = iterations;
  fit.beta = beta;
  fit.fitted = eta.cwiseMin(kEtaLimit).array().exp().matrix();
  fit.ssr = (y - fit.fitted).squaredNorm();
  fit.sigma2 = fit.ssr / static_cast<double>(n - p);

  const Eigen::MatrixXd xw = fit.fitted.asDiagonal() * dm.X;
  fit.se = (inverse_gram_diagonal(xw) * fit.sigma2).cwiseSqrt();
  fit.z = fit.beta.cwiseQuotient(fit.se);
  fit.p_values.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) fit.p_values[k] = normal_two_sided_p(fit.z[k]);
  fit.loglik = gaussian_loglik(static_cast<double>(n), fit.ssr);
  fit.aic = gaussian_aic(static_cast<double>(n), static_cast<double>(p), fit.ssr);
  return fit;
}

}  // namespace capax::stats
