#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include <nlohmann/json.hpp>

#include "banksim/config.hpp"
#include "banksim/harness.hpp"

using namespace banksim;

namespace {

ModelSpec fig2_spec() {
  return model_from_config(Config::load(std::filesystem::path(BANKSIM_PRESET_DIR) / "fig2.conf"));
}

ConvergenceParams small_fan() {
  ConvergenceParams p;
  p.spec = fig2_spec();
  p.init = Exponential{0.5};
  p.limit = derive_limit(p.spec);
  p.n_list = {5, 50};
  p.runs = 40;
  p.horizon = 4.0;
  p.grid_dt = 0.5;
  p.seed = 99;
  return p;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST(Stats, QuantileType7) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_NEAR(quantile_sorted(x, 0.05), 1.15, 1e-14);
  EXPECT_NEAR(quantile_sorted(x, 0.95), 3.85, 1e-14);
  EXPECT_EQ(quantile_sorted(x, 0.0), 1.0);
  EXPECT_EQ(quantile_sorted(x, 1.0), 4.0);
  EXPECT_EQ(quantile_sorted({7.0}, 0.3), 7.0);
}

TEST(Stats, PearsonAndMeanSe) {
  EXPECT_NEAR(pearson({1, 2, 3}, {2, 4, 6}), 1.0, 1e-14);
  EXPECT_NEAR(pearson({1, 2, 3}, {3, 2, 1}), -1.0, 1e-14);
  EXPECT_TRUE(std::isnan(pearson({1, 1, 1}, {1, 2, 3})));
  EXPECT_TRUE(std::isnan(pearson({1}, {2})));
  const auto s = mean_se({1.0, NAN, 3.0});
  EXPECT_EQ(s.count, 2u);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_NEAR(s.sd, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(s.se, 1.0, 1e-14);
}

TEST(Stats, NonMonotone) {
  EXPECT_FALSE(non_monotone({1, 2, 3}));
  EXPECT_FALSE(non_monotone({3, 2, 2, 1}));
  EXPECT_TRUE(non_monotone({1, 0.5, 0.7}));
}

TEST(Stats, KdeOfSinglePointIsGaussian) {
  const std::vector<double> grid{-1.0, 0.0, 1.0};
  const auto d = gaussian_kde({0.0}, grid, 0.5);
  EXPECT_NEAR(d[1], 1.0 / (0.5 * std::sqrt(2 * M_PI)), 1e-14);
  EXPECT_NEAR(d[0], d[2], 1e-15);
}

TEST(Convergence, BandsAndLimit) {
  const auto p = small_fan();
  const auto res = convergence_experiment(p);
  ASSERT_EQ(res.cells.size(), 2u);
  ASSERT_TRUE(res.ode.has_value());
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    const auto idx = static_cast<std::size_t>(std::llround(res.t[k] / res.ode->dt));
    EXPECT_EQ(res.limit[k], res.ode->m[idx]);
    for (const auto& c : res.cells) {
      EXPECT_LE(c.q05[k], c.mean[k]);
      EXPECT_LE(c.mean[k], c.q95[k]);
    }
  }
  double w5 = 0.0, w50 = 0.0;
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    w5 += res.cells[0].q95[k] - res.cells[0].q05[k];
    w50 += res.cells[1].q95[k] - res.cells[1].q05[k];
  }
  EXPECT_LT(w50, w5);
  EXPECT_EQ(res.cells[1].m.size(), res.t.size());
  EXPECT_EQ(res.cells[1].m[0].size(), p.runs);
}

TEST(Convergence, Deterministic) {
  auto p = small_fan();
  const auto a = fan_csv(convergence_experiment(p));
  p.threads = 2;
  EXPECT_EQ(a, fan_csv(convergence_experiment(p)));
  const auto lines = csv_lines(a);
  EXPECT_EQ(lines[0], "t,N,mean,q05,q95,limit,null_count");
  EXPECT_EQ(lines.size(), 1 + 2 * 9u);
}

TEST(Convergence, EmptySystemsAreCountedNotAveraged) {
  auto p = small_fan();
  p.spec.birth_rate = ConstantRate{0.0};
  p.spec.default_rate.form = ConstantDefault{2.0};
  p.n_list = {2};
  p.runs = 20;
  p.limit = std::nullopt;
  const auto res = convergence_experiment(p);
  const auto& c = res.cells[0];
  EXPECT_GT(c.null_count.back(), 0u);
  std::size_t nan = 0;
  for (double m : c.m.back()) nan += std::isnan(m);
  EXPECT_EQ(nan, c.null_count.back());
  if (c.null_count.back() < p.runs) EXPECT_FALSE(std::isnan(c.mean.back()));
}

TEST(Capital, HugeThresholdCapturesEverything) {
  CapitalParams p;
  p.spec = fig2_spec();
  p.init = Exponential{0.5};
  p.n_list = {5};
  p.runs = 20;
  p.threshold = 1e6;
  p.time = 2.0;
  const auto res = capital_distribution_experiment(p);
  for (double d : res.cells[0].d)
    if (!std::isnan(d)) EXPECT_EQ(d, 1.0);
  const auto lines = csv_lines(histogram_csv(res));
  EXPECT_EQ(lines[0], "N,run,d_N");
  EXPECT_EQ(lines.size(), 21u);
}

TEST(Chaos, IndependentBanksAreUncorrelated) {
  ChaosParams p;
  p.spec = fig2_spec();
  p.spec.birth_rate = ConstantRate{0.0};
  p.spec.default_rate.form = ConstantDefault{0.0};
  p.limit = derive_limit(p.spec);
  p.init = Exponential{0.5};
  p.n_list = {5};
  p.runs = 2000;
  p.horizon = 1.0;
  p.grid_dt = 0.5;
  p.oracle_runs = 200;
  p.seed = 3;
  const auto res = chaos_experiment(p);
  const auto& c = res.cells[0];
  for (std::size_t k = 1; k < res.t.size(); ++k) {
    EXPECT_EQ(c.surv_finite[k], 1.0);
    EXPECT_EQ(res.surv_oracle[k], 1.0);
    EXPECT_LT(std::abs(c.corr[k]), 3.0 / std::sqrt(static_cast<double>(c.n_eff[k])));
  }
  const auto lines = csv_lines(chaos_csv(res, 0));
  EXPECT_EQ(lines[0], "t,surv_finite,surv_oracle,corr,n_eff");
}

TEST(ConfigReaders, PresetsParse) {
  const auto cfg = Config::load(std::filesystem::path(BANKSIM_PRESET_DIR) / "fig2.conf");
  const auto conv = convergence_params(cfg);
  EXPECT_EQ(conv.n_list, (std::vector<std::int64_t>{5, 25, 100}));
  EXPECT_EQ(conv.runs, 100u);
  EXPECT_EQ(conv.seed, 20240607u);
  EXPECT_EQ(conv.init, DistFamily{Exponential{0.5}});
  const auto cap = capital_params(cfg);
  EXPECT_EQ(cap.threshold, 1.0);
  EXPECT_EQ(cap.time, 10.0);
  const auto chaos = chaos_params(cfg);
  EXPECT_EQ(chaos.n_list, (std::vector<std::int64_t>{5, 200}));
  EXPECT_EQ(chaos.x1, 2.0);
}

TEST(Manifest, HashTracksConfig) {
  ExperimentManifest a;
  a.kind = "converge";
  a.config = Config::parse("seed = 1\nmodel.r = 0.05\n");
  auto b = a;
  EXPECT_EQ(a.hash(), b.hash());
  b.config.set("seed", "2");
  EXPECT_NE(a.hash(), b.hash());
  b = a;
  b.kind = "capital";
  EXPECT_NE(a.hash(), b.hash());
  const auto doc = nlohmann::json::parse(a.to_json());
  EXPECT_EQ(doc["kind"], "converge");
  EXPECT_EQ(doc["hash"], a.hash());
  EXPECT_EQ(doc["config"]["model.r"], "0.05");
}

TEST(SpecAtCount, SetsInitialCountInSetting2) {
  auto s = fig2_spec();
  EXPECT_EQ(spec_at_count(s, 7), s);
  s.scaling = Setting2{100};
  s.birth_rate = LinearInInitialCount{0.2};
  s.contagion = UniformOverInitial{1.0};
  EXPECT_EQ(std::get<Setting2>(spec_at_count(s, 7).scaling).n0, 7);
}
