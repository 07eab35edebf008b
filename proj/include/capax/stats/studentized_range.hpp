#pragma once

#include <limits>

namespace capax::stats {

/// Above this many degrees of freedom the variance estimate is treated as
/// exact (the df -> infinity form of the distribution).
inline constexpr double kLargeDf = 25000.0;

/// P(range of k standard normals < w), the df = infinity studentized range CDF.
double studentized_range_cdf_inf(double w, int k);

/// P(Q < q) for the studentized range with k groups and df degrees of freedom.
/// df may be +infinity.
double studentized_range_cdf(double q, int k, double df);

/// Quantile q with P(Q < q) = confidence, by root finding on the CDF.
/// Throws QuantileNoConverge when the solver fails.
double q_studentized(double confidence, int k, double df);

}  // namespace capax::stats
