#pragma once

namespace mcfuse {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
double regularized_gamma_p(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

double chi_square_cdf(double x, double df);

// Survival function, accurate in the far tail.
double chi_square_sf(double x, double df);

// x such that chi_square_cdf(x, df) = prob, for prob in (0, 1).
double chi_square_quantile(double prob, double df);

}  // namespace mcfuse
