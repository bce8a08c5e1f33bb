#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "banksim/error.hpp"
#include "banksim/measure.hpp"
#include "banksim/rng.hpp"

using namespace banksim;

namespace {

// minimum over all matchings of equal-size samples
double brute_force_wp(std::vector<double> a, const std::vector<double>& b, double p) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) cost += std::pow(std::abs(a[i] - b[perm[i]]), p);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::pow(best / static_cast<double>(a.size()), 1.0 / p);
}

std::vector<double> replicate(const std::vector<double>& x, std::size_t k) {
  std::vector<double> out;
  for (double v : x)
    for (std::size_t j = 0; j < k; ++j) out.push_back(v);
  return out;
}

}  // namespace

TEST(MeasureStats, Examples) {
  auto s = measure_stats(EmpiricalMeasure({1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.p_moment, 2.0);
  s = measure_stats(EmpiricalMeasure({2}), 3.0);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.p_moment, 8.0);
  s = measure_stats(EmpiricalMeasure({1, 1, 4}), 2.0);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.p_moment, 6.0);
}

TEST(MeasureStats, MeanEqualsFirstMomentExactly) {
  RngStream rng(3, 1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(1 + rng.below(40));
    for (auto& v : x) v = rng.exponential(0.3);
    const auto s = measure_stats(EmpiricalMeasure(x), 1.0);
    EXPECT_EQ(s.mean, s.p_moment);
  }
}

TEST(MeasureStats, EmptyThrows) {
  EXPECT_THROW(measure_stats(EmpiricalMeasure{}, 1.0), EmptyMeasure);
  EXPECT_THROW(EmpiricalMeasure{}.mean(), EmptyMeasure);
}

TEST(EmpiricalMeasure, SortsAndRejectsNegative) {
  const EmpiricalMeasure m({3, 1, 2});
  EXPECT_EQ(std::vector<double>(m.samples().begin(), m.samples().end()), (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(EmpiricalMeasure({1.0, -0.5}), DomainError);
  EXPECT_DOUBLE_EQ(m.quantile(0.0), 1.0);
  EXPECT_DOUBLE_EQ(m.quantile(0.5), 2.0);
  EXPECT_DOUBLE_EQ(m.quantile(1.0), 3.0);
}

TEST(Wasserstein, Examples) {
  EXPECT_DOUBLE_EQ(wasserstein_p(EmpiricalMeasure({1}), EmpiricalMeasure({3}), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(wasserstein_p(EmpiricalMeasure({1, 2}), EmpiricalMeasure({2, 3}), 1.0), 1.0);
  EXPECT_DOUBLE_EQ(wasserstein_p(EmpiricalMeasure({1, 5}), EmpiricalMeasure({1, 5}), 2.0), 0.0);
}

TEST(Wasserstein, MatchesPermutationSearch) {
  RngStream rng(11, 2);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = 10.0 * rng.uniform();
    for (auto& v : b) v = 10.0 * rng.uniform();
    for (double p : {1.0, 2.0, 3.5})
      EXPECT_NEAR(wasserstein_p(EmpiricalMeasure(a), EmpiricalMeasure(b), p), brute_force_wp(a, b, p), 1e-12);
  }
}

TEST(Wasserstein, UnequalSizesMatchReplicatedSamples) {
  RngStream rng(12, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t na = 1 + rng.below(5), nb = 1 + rng.below(5);
    std::vector<double> a(na), b(nb);
    for (auto& v : a) v = 4.0 * rng.uniform();
    for (auto& v : b) v = 4.0 * rng.uniform();
    const std::size_t l = std::lcm(na, nb);
    const EmpiricalMeasure ra(replicate(a, l / na)), rb(replicate(b, l / nb));
    for (double p : {1.0, 2.0}) {
      double direct = 0.0;
      for (std::size_t i = 0; i < l; ++i) direct += std::pow(std::abs(ra.samples()[i] - rb.samples()[i]), p);
      direct = std::pow(direct / static_cast<double>(l), 1.0 / p);
      EXPECT_NEAR(wasserstein_p(EmpiricalMeasure(a), EmpiricalMeasure(b), p), direct, 1e-12);
    }
  }
}

TEST(Wasserstein, MetricProperties) {
  RngStream rng(13, 2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(1 + rng.below(8)), b(1 + rng.below(8)), c(1 + rng.below(8));
    for (auto* v : {&a, &b, &c})
      for (auto& x : *v) x = rng.exponential(1.0);
    const EmpiricalMeasure ma(a), mb(b), mc(c);
    const double ab = wasserstein_p(ma, mb, 2.0);
    EXPECT_NEAR(ab, wasserstein_p(mb, ma, 2.0), 1e-12);
    EXPECT_LE(ab, wasserstein_p(ma, mc, 2.0) + wasserstein_p(mc, mb, 2.0) + 1e-12);
    EXPECT_LE(wasserstein_p(ma, mb, 1.0), ab + 1e-12);
  }
}

TEST(Wasserstein, Errors) {
  EXPECT_THROW(wasserstein_p(EmpiricalMeasure({1}), EmpiricalMeasure({2}), 0.5), DomainError);
  EXPECT_THROW(wasserstein_p(EmpiricalMeasure{}, EmpiricalMeasure({2}), 1.0), EmptyMeasure);
}

TEST(FractionBelow, Examples) {
  EXPECT_DOUBLE_EQ(fraction_below(EmpiricalMeasure({0.5, 1.5, 2.5}), 1.0), 1.0 / 3.0);
  EXPECT_EQ(fraction_below(EmpiricalMeasure({0.5, 1.5, 2.5}), 0.1), 0.0);
  EXPECT_EQ(fraction_below(EmpiricalMeasure({0.5, 1.0}), 1.0), 1.0);
  EXPECT_THROW(fraction_below(EmpiricalMeasure{}, 1.0), EmptyMeasure);
}
