#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "capax/stats/design.hpp"

namespace capax::stats {

struct LinearFit {
  std::vector<std::string> labels;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::VectorXd z;
  Eigen::VectorXd p_values;
  Eigen::VectorXd fitted;
  double ssr = 0.0;
  double sigma2 = 0.0;  // ssr / (n - p)
  double loglik = 0.0;
  double aic = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  int iterations = 0;  // IRLS iterations; 0 for OLS
};

/// Gaussian log-likelihood at the ML variance ssr/n.
double gaussian_loglik(double n, double ssr);

/// 2p - 2 loglik, counting only the p regression coefficients.
double gaussian_aic(double n, double p, double ssr);

/// Two-sided normal p-value of a Wald statistic.
double normal_two_sided_p(double z);

/// diag((X'X)^-1) from a pivoted QR of X; X must have full column rank.
Eigen::VectorXd inverse_gram_diagonal(const Eigen::MatrixXd& X);

/// Least squares via column-pivoted Householder QR. Standard errors use
/// sigma2 = ssr / (n - p); Wald statistics are referred to the normal.
/// Throws RankDeficient when X is not of full column rank.
LinearFit ols_fit(const DesignMatrix& dm);

}  // namespace capax::stats
