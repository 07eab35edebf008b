#pragma once

#include "capax/stats/ols.hpp"

namespace capax::stats {

struct GlmOptions {
  /// Converged when |dev - dev_prev| / (|dev| + 0.1) falls below this.
  double tolerance = 1e-8;
  int max_iterations = 100;
};

/// Gaussian GLM with log link, E[y] = exp(X beta), fitted by iteratively
/// reweighted least squares with step halving. se are scaled by the
/// dispersion dev/(n-p); loglik and AIC use the Gaussian likelihood at the
/// fitted means with the same parameter count as ols_fit.
/// Throws IrlsDiverged (with the deviance trace) if it does not converge.
LinearFit glm_log_link_fit(const DesignMatrix& dm, const GlmOptions& options = {});

}  // namespace capax::stats
