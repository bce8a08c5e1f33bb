#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "banksim/error.hpp"
#include "banksim/ode.hpp"

using namespace banksim;

namespace {

MeanFieldLimit constants() {
  MeanFieldLimit mf;
  mf.r = 0.05;
  mf.sigma = 0.2;
  mf.lambda = LimitConstantRate{0.2};
  mf.kappa = LimitConstantKill{0.1};
  mf.birth = Exponential{1.0};
  mf.dbar = 0.5;
  return mf;
}

double sup_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double g = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
  return g;
}

}  // namespace

TEST(Setting1, ConstantsMatchKnownSolution) {
  const auto sol = solve_setting1(constants(), 2.0, 10.0, 1e-3);
  ASSERT_EQ(sol.t.size(), 10001u);
  EXPECT_NEAR(sol.m_terminal(), 1.0 + std::exp(-2.0), 1e-8);
  ASSERT_TRUE(sol.has_closed_form());
  for (std::size_t k = 0; k < sol.t.size(); k += 500)
    EXPECT_NEAR(sol.m_closed[k], 1.0 + std::exp(-0.2 * sol.t[k]), 1e-13);
  EXPECT_LT(sup_gap(sol.m, sol.m_closed), 1e-8);
  ASSERT_TRUE(sol.m_limit.has_value());
  EXPECT_NEAR(*sol.m_limit, 1.0, 1e-14);
}

TEST(Setting1, ClosedFormGapAcrossConstantConfigs) {
  for (double lam : {0.0, 0.2, 1.0})
    for (double kap : {0.0, 0.1, 0.5})
      for (double m0 : {0.3, 2.0}) {
        auto mf = constants();
        mf.lambda = LimitConstantRate{lam};
        mf.kappa = LimitConstantKill{kap};
        const auto sol = solve_setting1(mf, m0, 25.0, 1e-3);
        EXPECT_LT(sup_gap(sol.m, sol.m_closed), 1e-8 * std::max(1.0, sol.m.back())) << lam << " " << kap;
      }
}

TEST(Setting1, StationaryStartStaysPut) {
  const auto sol = solve_setting1(constants(), 1.0, 25.0, 1e-2);
  for (double m : sol.m) EXPECT_NEAR(m, 1.0, 1e-13);
}

TEST(Setting1, ZeroRightSideKeepsMeanConstant) {
  auto mf = constants();
  mf.lambda = LimitConstantRate{0.0};
  mf.kappa = LimitConstantKill{0.1};
  mf.r = 0.05;
  const auto sol = solve_setting1(mf, 3.0, 10.0, 1e-2);
  for (double m : sol.m) EXPECT_NEAR(m, 3.0, 1e-13);
}

TEST(Setting1, FourthOrderConvergence) {
  const auto coarse = solve_setting1(constants(), 2.0, 25.0, 0.2);
  const auto fine = solve_setting1(constants(), 2.0, 25.0, 0.1);
  const double ratio = sup_gap(coarse.m, coarse.m_closed) / sup_gap(fine.m, fine.m_closed);
  EXPECT_GE(ratio, 8.0);
  EXPECT_LE(ratio, 32.0);
}

TEST(Setting1, SigmaDoesNotEnter) {
  auto a = constants();
  auto b = a;
  b.sigma = 0.9;
  const auto sa = solve_setting1(a, 2.0, 5.0, 1e-3), sb = solve_setting1(b, 2.0, 5.0, 1e-3);
  EXPECT_EQ(sa.m, sb.m);
  EXPECT_EQ(sa.m_closed, sb.m_closed);
  const auto s2a = solve_setting2(a, 2.0, 5.0, 1e-3), s2b = solve_setting2(b, 2.0, 5.0, 1e-3);
  EXPECT_EQ(s2a.m, s2b.m);
  EXPECT_EQ(s2a.n_inf, s2b.n_inf);
  EXPECT_EQ(stationary_mean(a, 0.1, 10.0), stationary_mean(b, 0.1, 10.0));
}

TEST(Setting1, RejectsBadInputs) {
  EXPECT_THROW(solve_setting1(constants(), 2.0, 10.0, 0.0), DomainError);
  EXPECT_THROW(solve_setting1(constants(), -1.0, 10.0, 1e-3), DomainError);
  auto mf = constants();
  mf.kappa = LimitHyperbolicKill{0.2, 0.01};
  EXPECT_THROW(solve_setting1(mf, 2.0, 10.0, 1e-3), DomainError);
}

TEST(Setting1, BlowupDetected) {
  auto mf = constants();
  mf.lambda = LimitConstantRate{0.0};
  mf.kappa = LimitConstantKill{0.0};
  mf.r = 200.0;
  EXPECT_THROW(solve_setting1(mf, 1.0, 10.0, 1e-2), NumericalBlowup);
}

TEST(StationaryMean, ConstantsGiveOne) {
  const auto mf = constants();
  const double m = stationary_mean(mf, 0.1, 10.0);
  EXPECT_NEAR(m, 1.0, 1e-12);
  EXPECT_LT(std::abs(setting1_rhs(mf, m)), 1e-10);
}

TEST(StationaryMean, MatchesLongRunTrajectory) {
  auto mf = constants();
  mf.lambda = LimitLinearInMean{0.1};
  mf.birth = LogNormal{0.0, 0.5};
  const auto sol = solve_setting1(mf, 2.0, 400.0, 1e-2);
  EXPECT_NEAR(stationary_mean(constants(), 0.1, 10.0), solve_setting1(constants(), 2.0, 200.0, 1e-2).m_terminal(),
              1e-6);
  EXPECT_FALSE(sol.has_closed_form());
}

TEST(StationaryMean, NoSignChange) {
  auto mf = constants();
  mf.lambda = LimitConstantRate{0.0};
  mf.kappa = LimitConstantKill{0.5};
  EXPECT_THROW(stationary_mean(mf, 0.1, 10.0), BracketError);
}

TEST(Setting2, ConstantsLimits) {
  const auto sol = solve_setting2(constants(), 2.0, 200.0, 1e-3);
  EXPECT_EQ(sol.n_inf.front(), 1.0);
  ASSERT_TRUE(sol.n_limit && sol.m_limit);
  EXPECT_NEAR(*sol.n_limit, 2.0, 1e-14);
  EXPECT_NEAR(*sol.m_limit, 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(sol.n_inf.back(), 2.0, 1e-6);
  EXPECT_NEAR(sol.m_terminal(), 2.0 / 3.0, 1e-6);
  EXPECT_LT(sup_gap(sol.m, sol.m_closed), 1e-8);
  EXPECT_LT(sup_gap(sol.n_inf, sol.n_closed), 1e-8);
  for (double n : sol.n_inf) EXPECT_GT(n, 0.0);
}

TEST(Setting2, BalancedRatesKeepUnitCount) {
  auto mf = constants();
  mf.lambda = LimitConstantRate{0.1};
  const auto sol = solve_setting2(mf, 2.0, 20.0, 1e-2);
  for (double n : sol.n_inf) EXPECT_NEAR(n, 1.0, 1e-14);
}

TEST(NInfinity, ConstantInputsMatchClosedForm) {
  const double dt = 1e-3;
  const std::size_t steps = 25000;
  const std::vector<double> k(steps + 1, 0.1), lam(steps + 1, 0.2);
  const auto n = n_infinity_general(k, lam, dt);
  for (std::size_t i = 0; i <= steps; i += 1000) EXPECT_NEAR(n[i], 2.0 - std::exp(-0.1 * i * dt), 1e-7);
}

TEST(NInfinity, PureGrowth) {
  const double dt = 1e-2;
  std::vector<double> k(1001, 0.0), lam(1001);
  for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = 0.3 + 0.1 * i * dt;
  const auto n = n_infinity_general(k, lam, dt);
  for (std::size_t i = 0; i < n.size(); i += 100) {
    const double t = i * dt;
    EXPECT_NEAR(n[i], 1.0 + 0.3 * t + 0.05 * t * t, 1e-10);
  }
}

TEST(NInfinity, TrapezoidAgreesWithRk4) {
  const double dt = 1e-3;
  std::vector<double> k(20001), lam(20001);
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double t = i * dt;
    k[i] = 0.1 + 0.05 * std::cos(t);
    lam[i] = 0.2 + 0.1 * std::sin(2 * std::numbers::pi * t / 5);
  }
  EXPECT_LT(sup_gap(n_infinity_general(k, lam, dt), n_infinity_rk4(k, lam, dt)), 1e-4);
}

TEST(NInfinity, MisalignedInputsRejected) {
  EXPECT_THROW(n_infinity_general({0.1, 0.1}, {0.2}, 0.1), DomainError);
  EXPECT_THROW(n_infinity_general({}, {}, 0.1), DomainError);
  EXPECT_THROW(n_infinity_rk4({0.1}, {0.2, 0.2}, 0.1), DomainError);
}
