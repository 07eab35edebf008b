#include "capax/stats/studentized_range.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "capax/util/error.hpp"

namespace capax::stats {

namespace {

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double big_phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

void check_args(int k, double df) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "studentized range needs k >= 2");
  if (!(df >= 1.0)) throw Error(ErrorCode::InvalidArgument, "studentized range needs df >= 1");
}

}  // namespace

double studentized_range_cdf_inf(double w, int k) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "studentized range needs k >= 2");
  if (w <= 0.0) return 0.0;
  // k * integral phi(z) [Phi(z + w) - Phi(z)]^(k-1) dz; the integrand is
  // negligible outside [-9, 9].
  auto integrand = [&](double z) {
    const double band = big_phi(z + w) - big_phi(z);
    return band > 0.0 ? phi(z) * std::pow(band, k - 1) : 0.0;
  };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double value = static_cast<double>(k) * Quad::integrate(integrand, -9.0 - w, 9.0, 12, 1e-13);
  return std::min(1.0, std::max(0.0, value));
}

double studentized_range_cdf(double q, int k, double df) {
  check_args(k, df);
  if (q <= 0.0) return 0.0;
  if (!std::isfinite(df) || df > kLargeDf) return studentized_range_cdf_inf(q, k);

  // Average the df = infinity CDF over s = sqrt(chi2_df / df).
  const double log_norm = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
  auto density = [&](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s);
  };
  const double spread = 9.0 / std::sqrt(df);
  const double lo = std::max(0.0, 1.0 - spread);
  const double hi = 1.0 + spread + (df < 10.0 ? 4.0 : 0.0);
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double value =
      Quad::integrate([&](double s) { return density(s) * studentized_range_cdf_inf(q * s, k); }, lo, hi, 10, 1e-11);
  return std::min(1.0, std::max(0.0, value));
}

double q_studentized(double confidence, int k, double df) {
  check_args(k, df);
  if (!(confidence > 0.0 && confidence < 1.0))
    throw Error(ErrorCode::InvalidArgument, "confidence must lie in (0, 1)");

  auto f = [&](double q) { return studentized_range_cdf(q, k, df) - confidence; };
  double lo = 0.0;
  double hi = 1.0;
  int expansions = 0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 40) throw Error(ErrorCode::QuantileNoConverge, "could not bracket the quantile");
  }
  std::uintmax_t max_iter = 100;
  const auto [a, b] =
      boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(40), max_iter);
  if (max_iter >= 100) throw Error(ErrorCode::QuantileNoConverge, "root finder hit its iteration limit");
  return 0.5 * (a + b);
}

}  // namespace capax::stats
