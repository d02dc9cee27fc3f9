#include "mcfuse/chi_square.hpp"

#include "mcfuse/error.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <string>

namespace mcfuse {

namespace {

void require_gamma_args(double a, double x) {
  if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a)) {
    throw DomainError("incomplete gamma needs a > 0 and x >= 0");
  }
}

boost::math::chi_squared_distribution<double> distribution(double df) {
  if (!(df > 0.0) || !std::isfinite(df)) {
    throw DomainError("chi-square degrees of freedom must be positive, got " + std::to_string(df));
  }
  return boost::math::chi_squared_distribution<double>(df);
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  require_gamma_args(a, x);
  return std::isinf(x) ? 1.0 : boost::math::gamma_p(a, x);
}

double regularized_gamma_q(double a, double x) {
  require_gamma_args(a, x);
  return std::isinf(x) ? 0.0 : boost::math::gamma_q(a, x);
}

double chi_square_cdf(double x, double df) {
  const auto dist = distribution(df);
  if (!(x > 0.0)) {
    if (std::isnan(x)) throw DomainError("chi-square argument is NaN");
    return 0.0;
  }
  return std::isinf(x) ? 1.0 : boost::math::cdf(dist, x);
}

double chi_square_sf(double x, double df) {
  const auto dist = distribution(df);
  if (!(x > 0.0)) {
    if (std::isnan(x)) throw DomainError("chi-square argument is NaN");
    return 1.0;
  }
  return std::isinf(x) ? 0.0 : boost::math::cdf(boost::math::complement(dist, x));
}

double chi_square_quantile(double prob, double df) {
  const auto dist = distribution(df);
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("quantile probability must lie in (0, 1)");
  return boost::math::quantile(dist, prob);
}

}  // namespace mcfuse
