// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "banksim/cli.hpp"
#include "banksim/config.hpp"
#include "banksim/generator.hpp"
#include "banksim/harness.hpp"
#include "banksim/io.hpp"
#include "banksim/measure.hpp"
#include "banksim/ode.hpp"
#include "banksim/parallel.hpp"
#include "banksim/particles.hpp"
#include "banksim/simulator.hpp"

namespace fs = std::filesystem;
using namespace banksim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Config preset(const std::string& name) { return Config::load(fs::path(BANKSIM_PRESET_DIR) / name); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::size_t index_of(const std::vector<double>& t, double value) {
  const auto it = std::min_element(t.begin(), t.end(), [&](double a, double b) {
    return std::abs(a - value) < std::abs(b - value);
  });
  return static_cast<std::size_t>(it - t.begin());
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome setting1_convergence() {
  const auto start = std::chrono::steady_clock::now();
  auto p = convergence_params(preset("fig2.conf"));
  p.n_list = {100};
  p.runs = 100;
  const auto res = convergence_experiment(p);
  const double elapsed = seconds_since(start);
  const auto& cell = res.cells.at(0);
  Outcome out{!cell.failed && elapsed < 300.0, ""};
  for (double t : {0.0, 5.0, 10.0}) {
    const auto k = index_of(res.t, t);
    const double exact = 1.0 + std::exp(-0.2 * t);
    const double gap = std::abs(cell.mean[k] - exact);
    out.pass = out.pass && gap < 0.05;
    out.detail += fmt("t=%g ave=%.4f exact=%.4f gap=%.4f; ", t, cell.mean[k], exact, gap);
  }
  out.detail += fmt("runtime %.1fs", elapsed);
  return out;
}

Outcome stationary() {
  const auto mf = derive_limit(model_from_config(preset("fig2.conf")));
  const double m = stationary_mean(mf, 1e-6, 100.0);
  const double residual = std::abs(setting1_rhs(mf, m));
  return {std::abs(m - 1.0) < 1e-10 && residual < 1e-10, fmt("M=%.15f residual=%.2e", m, residual)};
}

Outcome setting2() {
  const auto cfg = preset("fig4.conf");
  auto p = convergence_params(cfg);
  const auto long_run = solve_setting2(*p.limit, mean(p.init), 200.0, p.ode_dt);
  const double n_gap = std::abs(long_run.n_inf.back() - 2.0);
  const double m_gap = std::abs(long_run.m.back() - 2.0 / 3.0);

  p.n_list = {100};
  p.runs = 100;
  const auto res = convergence_experiment(p);
  const auto& cell = res.cells.at(0);
  const auto k = index_of(res.t, 25.0);
  const double mean_gap = std::abs(cell.mean[k] - res.limit[k]);
  const double ratio_gap = std::abs(cell.ratio_mean[k] - res.n_limit[k]);
  const bool pass = n_gap < 1e-6 && m_gap < 1e-6 && !cell.failed && mean_gap < 3.0 * cell.mean_se[k] &&
                    ratio_gap < 3.0 * cell.ratio_se[k];
  return {pass, fmt("N(200)=%.9f m(200)=%.9f; m_100(25)=%.4f vs %.4f (3se=%.4f); N/N0=%.4f vs %.4f (3se=%.4f)",
                    long_run.n_inf.back(), long_run.m.back(), cell.mean[k], res.limit[k], 3.0 * cell.mean_se[k],
                    cell.ratio_mean[k], res.n_limit[k], 3.0 * cell.ratio_se[k])};
}

std::vector<double> exp_quantiles(std::size_t k) {
  std::vector<double> x(k);
  for (std::size_t i = 0; i < k; ++i) x[i] = quantile(Exponential{1.0}, (static_cast<double>(i) + 0.5) / k);
  return x;
}

Outcome generator_consistency() {
  ModelSpec spec;
  spec.r = 0.05;
  spec.sigma = 0.2;
  spec.birth_rate = LinearInCount{1.0};
  spec.default_rate.form = HyperbolicDefault{0.2, 0.01, false};
  spec.birth_size = Exponential{1.0};
  spec.contagion = UniformOverCount{1.0};
  const auto mf = derive_limit(spec);
  const TestFunction f = BoundedRational{};
  const double target = limit_operator_A(EmpiricalMeasure(exp_quantiles(1'000'000)), mf, f);
  std::vector<double> err;
  std::string detail;
  for (std::size_t k : {50, 100, 200, 400}) {
    err.push_back(std::abs(gen_empirical(SystemState::from_reserves(exp_quantiles(k)), spec, f) - target));
    detail += fmt("k=%zu err=%.3e; ", k, err.back());
  }
  bool pass = err.back() < err.front() / 4.0;
  for (std::size_t i = 1; i < err.size(); ++i) pass = pass && err[i] < err[i - 1];
  return {pass, detail + fmt("ratio=%.2f", err.front() / err.back())};
}

double empirical_f(const SystemState& st, const TestFunction& f) {
  if (st.banks.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& b : st.banks) acc += value(f, b.reserve);
  return acc / static_cast<double>(st.count());
}

Outcome short_time() {
  const auto spec = model_from_config(preset("fig1.conf"));
  const auto x = SystemState::from_reserves({0.5, 1.0, 1.5, 2.0, 3.0});
  const TestFunction f = BoundedRational{};
  const double h = 0.005;
  const std::size_t paths = 100000;
  const double base = empirical_f(x, f);
  std::vector<double> y(paths);
  parallel_for(paths, 0, [&](std::size_t i) {
    FiniteSystem sys(spec, x, run_seed(515, i));
    sys.advance_to(h, 0.01, nullptr);
    y[i] = (empirical_f(sys.state(), f) - base) / h;
  });
  const auto s = mean_se(y);
  const double gen = gen_empirical(x, spec, f);
  const double tol = 3.0 * s.se + 10.0 * h;
  return {std::abs(s.mean - gen) < tol, fmt("MC=%.4f gen=%.4f gap=%.4f tol=%.4f", s.mean, gen, std::abs(s.mean - gen), tol)};
}

Outcome gbm_exactness() {
  ModelSpec spec;
  spec.r = 0.05;
  spec.sigma = 0.2;
  spec.birth_rate = ConstantRate{0.0};
  spec.default_rate.form = ConstantDefault{0.0};
  const auto init = SystemState::from_reserves({1.0, 2.0, 3.0});
  const std::size_t paths = 100000;
  std::vector<double> ratio(paths);
  parallel_for(paths, 0, [&](std::size_t i) {
    const auto rec = run_path(spec, init, 1.0, 1.0, run_seed(606, i));
    ratio[i] = rec.grid.back().s / init.total();
  });
  const auto s = mean_se(ratio);
  const double exact = std::exp(0.05);
  return {std::abs(s.mean - exact) < 3.0 * s.se, fmt("E[S(1)]/S(0)=%.5f exact=%.5f 3se=%.5f", s.mean, exact, 3.0 * s.se)};
}

double brute_force(std::vector<double> a, const std::vector<double>& b, double p) {
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

Outcome wasserstein() {
  RngStream rng(707, 1);
  double worst = 0.0;
  for (int pair = 0; pair < 1000; ++pair) {
    const std::size_t n = 1 + rng.below(6);
    std::vector<double> a(n), b(n);
    for (auto& v : a) v = 10.0 * rng.uniform();
    for (auto& v : b) v = 10.0 * rng.uniform();
    for (double p : {1.0, 2.0})
      worst = std::max(worst, std::abs(wasserstein_p(EmpiricalMeasure(a), EmpiricalMeasure(b), p) - brute_force(a, b, p)));
  }
  return {worst < 1e-12, fmt("max gap %.2e over 1000 pairs", worst)};
}

Outcome rate_bound() {
  const double lam = 0.1, kap = 0.3;
  const auto lambda_n = [&](std::int64_t n) { return lam * static_cast<double>(n); };
  const auto kappa_n = [&](std::int64_t) { return kap; };
  const auto v = [](std::int64_t n) { return static_cast<double>(n + 1); };
  const auto half = verify_rate_bound(lambda_n, kappa_n, v, 0.5 * (kap - lam), 10000);
  const auto full = verify_rate_bound(lambda_n, kappa_n, v, kap - lam, 10000);
  return {half.ok && !full.ok,
          fmt("alpha=%.2f ok=%d; alpha=%.2f ok=%d first violation n=%lld", 0.5 * (kap - lam), half.ok, kap - lam, full.ok,
              static_cast<long long>(full.first_violation.value_or(-1)))};
}

Outcome capital() {
  auto p = capital_params(preset("fig2.conf"));
  p.n_list = {5, 100};
  p.runs = 100;
  p.threshold = 1.0;
  p.time = 10.0;
  const auto res = capital_distribution_experiment(p);
  const auto& small = res.cells.at(0).stats;
  const auto& large = res.cells.at(1).stats;
  const bool pass = large.mean >= 0.5 && large.mean <= 0.7 && large.sd < small.sd;
  return {pass, fmt("N=100 mean=%.3f sd=%.3f; N=5 sd=%.3f", large.mean, large.sd, small.sd)};
}

Outcome particles_vs_ode() {
  const auto cfg = preset("fig2.conf");
  const auto mf = derive_limit(model_from_config(cfg));
  const auto init = dist_from_config(cfg, "init");
  const double dt = 1e-3;
  const auto ode = solve_setting1(mf, mean(init), 10.0, dt);
  const std::size_t reps = 50;
  std::vector<double> m10(reps);
  parallel_for(reps, 0, [&](std::size_t i) {
    m10[i] = run_particles(mf, 2000, init, 10.0, dt, run_seed(1010, i)).mean.back();
  });
  const auto s = mean_se(m10);
  const double gap = std::abs(s.mean - ode.m.back());
  return {gap < 3.0 * s.se, fmt("particles %.4f ode %.4f gap=%.4f 3se=%.4f", s.mean, ode.m.back(), gap, 3.0 * s.se)};
}

Outcome chaos() {
  const auto p = chaos_params(preset("fig2.conf"));
  const auto res = chaos_experiment(p);
  const auto k = index_of(res.t, 5.0);
  const ChaosCell* c5 = nullptr;
  const ChaosCell* c200 = nullptr;
  for (const auto& c : res.cells) {
    if (c.n == 5) c5 = &c;
    if (c.n == 200) c200 = &c;
  }
  if (!c5 || !c200) return {false, "preset lacks N=5 or N=200"};
  const double gap = std::abs(c200->surv_finite[k] - res.surv_oracle[k]);
  const bool powered = !c5->low_power[k] && !c200->low_power[k];
  const bool pass = powered && gap < 0.05 && std::abs(c200->corr[k]) < std::abs(c5->corr[k]);
  return {pass, fmt("surv N=200 %.4f oracle %.4f gap=%.4f; corr N=5 %.4f N=200 %.4f (n_eff %zu, %zu)",
                    c200->surv_finite[k], res.surv_oracle[k], gap, c5->corr[k], c200->corr[k], c5->n_eff[k],
                    c200->n_eff[k])};
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"banksim"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "banksim_acceptance_rerun";
  fs::remove_all(root);
  fs::create_directories(root);

  struct Job {
    std::string command;
    std::string preset;
    std::vector<std::pair<std::string, std::string>> overrides;
  };
  const std::vector<Job> jobs{
      {"simulate", "fig1.conf", {}},
      {"meanfield", "fig2.conf", {}},
      {"meanfield", "fig4.conf", {}},
      {"particles", "fig3.conf", {{"particles.n", "200"}, {"particles.horizon", "2"}, {"particles.snapshot_times", "1, 2"}}},
      {"particles", "fig4.conf", {{"particles.n", "200"}, {"particles.horizon", "2"}}},
      {"converge", "fig2.conf", {{"experiment.runs", "10"}, {"experiment.horizon", "3"}}},
      {"converge", "fig4.conf", {{"experiment.runs", "10"}, {"experiment.horizon", "3"}}},
      {"capital", "fig2.conf", {{"capital.runs", "10"}, {"capital.t", "3"}}},
      {"chaos", "fig2.conf", {{"chaos.runs", "200"}, {"chaos.oracle_runs", "500"}, {"chaos.horizon", "2"}}},
      {"stability", "example34.conf", {}},
      {"stability", "example36.conf", {}},
  };

  std::size_t compared = 0;
  std::string mismatch;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    auto cfg = preset(job.preset);
    for (const auto& [k, v] : job.overrides) cfg.set(k, v);
    const auto cfg_path = root / ("job" + std::to_string(j) + ".conf");
    write_file_atomic(cfg_path, cfg.to_text());
    const auto first = root / ("job" + std::to_string(j) + "_a");
    const auto second = root / ("job" + std::to_string(j) + "_b");
    if (cli({job.command, "--config", cfg_path.string(), "--out", first.string(), "--threads", "1"}) != 0)
      return {false, job.command + " " + job.preset + " failed"};
    if (cli({job.command, "--config", (first / "manifest.json").string(), "--out", second.string()}) != 0)
      return {false, job.command + " " + job.preset + " rerun failed"};
    for (const auto& entry : fs::directory_iterator(first)) {
      const auto name = entry.path().filename();
      if (!fs::exists(second / name) || read_file(entry.path()) != read_file(second / name)) {
        mismatch += job.command + "/" + name.string() + " ";
        continue;
      }
      ++compared;
    }
  }
  fs::remove_all(root);
  if (!mismatch.empty()) return {false, "differs: " + mismatch};
  return {true, fmt("%zu files byte-identical across %zu experiments", compared, jobs.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"setting-1 convergence", setting1_convergence},
      {"stationary mean", stationary},
      {"setting-2 limits", setting2},
      {"generator consistency", generator_consistency},
      {"short-time generator", short_time},
      {"GBM exactness", gbm_exactness},
      {"Wasserstein oracle", wasserstein},
      {"rate bound", rate_bound},
      {"capital distribution", capital},
      {"particles vs ODE", particles_vs_ode},
      {"propagation of chaos", chaos},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, check] = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << (i + 1) << "] " << name << ": " << o.detail
              << fmt(" (%.1fs)", seconds_since(start)) << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
