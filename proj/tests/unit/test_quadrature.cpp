#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "banksim/quadrature.hpp"

using namespace banksim;

TEST(GaussLegendre, WeightsSumToTwo) {
  double sum = 0.0;
  for (double w : gauss_legendre_weights()) sum += w;
  EXPECT_NEAR(sum, 2.0, 1e-14);
  EXPECT_EQ(gauss_legendre_nodes().size(), gauss_legendre_weights().size());
}

TEST(GaussLegendre, ExactForPolynomials) {
  for (int k = 0; k < 40; ++k) {
    const double got = gauss_legendre([k](double x) { return std::pow(x, k); }, 0.0, 1.0);
    EXPECT_NEAR(got, 1.0 / (k + 1), 1e-14) << k;
  }
}

TEST(GaussLegendre, SmoothIntegrands) {
  EXPECT_NEAR(gauss_legendre([](double x) { return std::sin(x); }, 0.0, std::numbers::pi), 2.0, 1e-14);
  EXPECT_NEAR(gauss_legendre([](double x) { return std::exp(x); }, -1.0, 2.0), std::exp(2.0) - std::exp(-1.0),
              1e-13);
}

TEST(IntegrateAdaptive, EndpointSingularity) {
  EXPECT_NEAR(integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-10), 2.0, 1e-6);
  EXPECT_NEAR(integrate_adaptive([](double x) { return std::log(x); }, 0.0, 1.0, 1e-10), -1.0, 1e-8);
}

TEST(IntegrateAdaptive, Kink) {
  EXPECT_NEAR(integrate_adaptive([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0), 0.29, 1e-10);
}
