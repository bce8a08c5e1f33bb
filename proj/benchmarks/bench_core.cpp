#include <benchmark/benchmark.h>

#include <vector>

#include "banksim/generator.hpp"
#include "banksim/limit.hpp"
#include "banksim/measure.hpp"
#include "banksim/particles.hpp"
#include "banksim/simulator.hpp"

using namespace banksim;

namespace {

ModelSpec fig2_spec() {
  ModelSpec s;
  s.r = 0.05;
  s.sigma = 0.2;
  s.birth_rate = LinearInCount{0.2};
  s.default_rate.form = ConstantDefault{0.1};
  s.contagion = UniformOverCount{1.0};
  return s;
}

ModelSpec fig1_spec() {
  ModelSpec s = fig2_spec();
  s.birth_rate = ConstantRate{1.0};
  s.default_rate.form = HyperbolicDefault{0.2, 0.01, true};
  return s;
}

std::vector<double> exp_reserves(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.exponential(0.5);
  return x;
}

}  // namespace

static void BM_NextEventLazy(benchmark::State& st) {
  FiniteSystem sys(fig2_spec(), SystemState::from_reserves(exp_reserves(st.range(0), 1)), 1);
  for (auto _ : st) benchmark::DoNotOptimize(sys.next_event(0.01));
}
BENCHMARK(BM_NextEventLazy)->Arg(5)->Arg(100)->Arg(1000);

static void BM_NextEventEager(benchmark::State& st) {
  FiniteSystem sys(fig1_spec(), SystemState::from_reserves(exp_reserves(st.range(0), 2)), 2);
  for (auto _ : st) benchmark::DoNotOptimize(sys.next_event(0.01));
}
BENCHMARK(BM_NextEventEager)->Arg(5)->Arg(100);

static void BM_StepParticles(benchmark::State& st) {
  const auto mf = derive_limit(fig2_spec());
  ParticleEnsemble ens(exp_reserves(st.range(0), 3), 3);
  for (auto _ : st) benchmark::DoNotOptimize(step_particles(ens, mf, 1e-3));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_StepParticles)->Arg(500)->Arg(2000);

static void BM_Wasserstein(benchmark::State& st) {
  const EmpiricalMeasure a(exp_reserves(st.range(0), 4)), b(exp_reserves(st.range(0) + 7, 5));
  for (auto _ : st) benchmark::DoNotOptimize(wasserstein_p(a, b, 2.0));
}
BENCHMARK(BM_Wasserstein)->Arg(100)->Arg(10000);

static void BM_GenEmpirical(benchmark::State& st) {
  const auto state = SystemState::from_reserves(exp_reserves(st.range(0), 6));
  const auto spec = fig1_spec();
  const TestFunction f = BoundedRational{};
  for (auto _ : st) benchmark::DoNotOptimize(gen_empirical(state, spec, f));
}
BENCHMARK(BM_GenEmpirical)->Arg(5)->Arg(50);

BENCHMARK_MAIN();
