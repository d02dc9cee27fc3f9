#include "mcfuse/chi_square.hpp"
#include "mcfuse/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mcfuse;

// Closed forms: P(1, x) = 1 - e^-x, P(1/2, x) = erf(sqrt x); the chi-square
// with 2 degrees of freedom is exponential with mean 2, and with 4 degrees
// its survival function is e^(-x/2) (1 + x/2).

TEST(ChiSquare, RegularizedGammaClosedForms) {
  for (double x : {1e-3, 0.1, 1.0, 3.0, 10.0, 30.0}) {
    EXPECT_NEAR(regularized_gamma_p(1.0, x), -std::expm1(-x), 1e-15);
    EXPECT_NEAR(regularized_gamma_q(1.0, x), std::exp(-x), 1e-15 * std::max(1.0, std::exp(-x)));
    EXPECT_NEAR(regularized_gamma_p(0.5, x), std::erf(std::sqrt(x)), 1e-14);
    EXPECT_NEAR(regularized_gamma_p(3.0, x) + regularized_gamma_q(3.0, x), 1.0, 1e-15);
  }
}

TEST(ChiSquare, CdfAndSurvivalClosedForms) {
  for (double x : {0.01, 0.5, 1.0, 3.84, 10.0, 60.0}) {
    EXPECT_NEAR(chi_square_cdf(x, 1), std::erf(std::sqrt(x / 2)), 1e-14);
    EXPECT_NEAR(chi_square_cdf(x, 2), -std::expm1(-x / 2), 1e-14);
    const double sf4 = std::exp(-x / 2) * (1 + x / 2);
    EXPECT_NEAR(chi_square_sf(x, 4), sf4, 1e-14 * std::max(1e-3, sf4));
  }
  EXPECT_EQ(chi_square_cdf(0.0, 3), 0.0);
  EXPECT_EQ(chi_square_sf(-1.0, 3), 1.0);
}

TEST(ChiSquare, FarTailSurvival) {
  // e^-100 would vanish as 1 - cdf.
  EXPECT_NEAR(chi_square_sf(200.0, 2) / std::exp(-100.0), 1.0, 1e-12);
}

TEST(ChiSquare, QuantileInvertsCdf) {
  for (int df : {1, 2, 4, 9, 15, 50, 119}) {
    for (double p : {0.001, 0.05, 0.5, 0.9, 0.95, 0.99, 0.9999}) {
      EXPECT_NEAR(chi_square_cdf(chi_square_quantile(p, df), df), p, 1e-12) << df << " " << p;
    }
  }
  EXPECT_NEAR(chi_square_quantile(0.95, 2), -2 * std::log(0.05), 1e-12);
}

TEST(ChiSquare, CriticalValueOneDegree) {
  EXPECT_NEAR(chi_square_quantile(0.95, 1), 3.841458820694124, 1e-10);
}

TEST(ChiSquare, DomainErrors) {
  EXPECT_THROW(chi_square_quantile(1.0, 1), DomainError);
  EXPECT_THROW(chi_square_quantile(0.5, 0), DomainError);
  EXPECT_THROW(regularized_gamma_p(-1.0, 1.0), DomainError);
  EXPECT_THROW(chi_square_cdf(std::nan(""), 1), DomainError);
}
