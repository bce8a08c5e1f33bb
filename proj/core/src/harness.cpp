#include "banksim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "banksim/error.hpp"
#include "banksim/io.hpp"
#include "banksim/measure.hpp"
#include "banksim/overloaded.hpp"

#ifndef BANKSIM_VERSION
#define BANKSIM_VERSION "0.0.0"
#endif

namespace banksim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t grid_index(double t, double dt, std::size_t size) {
  const auto k = std::llround(t / dt);
  if (k < 0 || static_cast<std::size_t>(k) >= size || std::abs(static_cast<double>(k) * dt - t) > 1e-9 * std::max(1.0, t))
    throw DomainError("time " + std::to_string(t) + " is not on the solver grid");
  return static_cast<std::size_t>(k);
}

std::vector<double> finite_sorted(const std::vector<double>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (double x : v)
    if (!std::isnan(x)) out.push_back(x);
  std::sort(out.begin(), out.end());
  return out;
}

SimulationOptions grid_only(double dt_max, std::uint64_t cap) {
  SimulationOptions o;
  o.dt_max = dt_max;
  o.event_cap = cap;
  o.record_events = false;
  o.record_impacts = false;
  return o;
}

}  // namespace

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return kNaN;
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DomainError("pearson: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) return kNaN;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return kNaN;
  return sab / std::sqrt(saa * sbb);
}

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  double sum = 0.0;
  for (double v : values)
    if (!std::isnan(v)) {
      sum += v;
      ++out.count;
    }
  if (out.count == 0) return {kNaN, kNaN, kNaN, 0};
  out.mean = sum / static_cast<double>(out.count);
  double ss = 0.0;
  for (double v : values)
    if (!std::isnan(v)) ss += (v - out.mean) * (v - out.mean);
  out.sd = out.count > 1 ? std::sqrt(ss / static_cast<double>(out.count - 1)) : kNaN;
  out.se = out.count > 1 ? out.sd / std::sqrt(static_cast<double>(out.count)) : kNaN;
  return out;
}

bool non_monotone(const std::vector<double>& values, double tol) {
  bool up = false, down = false;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[i - 1] + tol) up = true;
    if (values[i] < values[i - 1] - tol) down = true;
  }
  return up && down;
}

std::vector<double> gaussian_kde(const std::vector<double>& samples, const std::vector<double>& grid,
                                 double bandwidth) {
  if (samples.empty()) throw EmptyMeasure();
  if (bandwidth <= 0.0) {
    const auto st = mean_se(samples);
    auto sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = std::isnan(st.sd) ? 0.0 : st.sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    if (!(spread > 0.0)) spread = 1.0;
    bandwidth = 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
  }
  const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double x : samples) {
      const double z = (grid[g] - x) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    out[g] = acc * norm;
  }
  return out;
}

ModelSpec spec_at_count(const ModelSpec& spec, std::int64_t n) {
  ModelSpec out = spec;
  if (auto* s2 = std::get_if<Setting2>(&out.scaling)) s2->n0 = n;
  return out;
}

// ---------------------------------------------------------------------------

std::optional<OdeSolution> limit_solution(const ModelSpec& spec, const std::optional<MeanFieldLimit>& limit,
                                          double m0, double horizon, double ode_dt) {
  if (!limit || !limit->kappa_x_independent()) return std::nullopt;
  if (std::holds_alternative<Setting2>(spec.scaling)) return solve_setting2(*limit, m0, horizon, ode_dt);
  return solve_setting1(*limit, m0, horizon, ode_dt);
}

ConvergenceResult convergence_experiment(const ConvergenceParams& p) {
  if (p.n_list.empty()) throw DomainError("N list must be nonempty");
  if (p.runs < 2) throw DomainError("run count must be >= 2");
  p.spec.validate();

  ConvergenceResult res;
  res.t = time_grid(p.horizon, p.grid_dt);
  const std::size_t nt = res.t.size();
  res.ode = limit_solution(p.spec, p.limit, mean(p.init), p.horizon, p.ode_dt);
  res.limit.assign(nt, kNaN);
  res.n_limit.assign(nt, kNaN);
  if (res.ode) {
    for (std::size_t k = 0; k < nt; ++k) {
      const auto i = grid_index(res.t[k], p.ode_dt, res.ode->t.size());
      res.limit[k] = res.ode->m[i];
      if (!res.ode->n_inf.empty()) res.n_limit[k] = res.ode->n_inf[i];
    }
    res.limit_non_monotone = non_monotone(res.ode->m);
  }

  for (std::int64_t n : p.n_list) {
    if (n < 1) throw DomainError("every N must be >= 1");
    ConvergenceCell cell;
    cell.n = n;
    const InitialCondition init{n, p.init, {}};
    auto ens = run_ensemble(spec_at_count(p.spec, n), init, p.runs, p.horizon, p.grid_dt,
                            derive_id(p.seed, static_cast<std::uint64_t>(n)), grid_only(p.dt_max, p.event_cap),
                            p.threads);
    cell.failures = std::move(ens.failures);
    cell.failed = !cell.failures.empty();
    cell.m.assign(nt, std::vector<double>(p.runs, kNaN));
    cell.ratio.assign(nt, std::vector<double>(p.runs, kNaN));
    for (std::size_t r = 0; r < p.runs; ++r) {
      const auto& g = ens.paths[r].grid;
      if (g.size() != nt) continue;
      for (std::size_t k = 0; k < nt; ++k) {
        cell.m[k][r] = g[k].m;
        cell.ratio[k][r] = static_cast<double>(g[k].n) / static_cast<double>(n);
      }
    }
    for (std::size_t k = 0; k < nt; ++k) {
      const auto sorted = finite_sorted(cell.m[k]);
      const auto st = mean_se(cell.m[k]);
      const auto rs = mean_se(cell.ratio[k]);
      cell.mean.push_back(st.mean);
      cell.mean_se.push_back(st.se);
      cell.q05.push_back(quantile_sorted(sorted, 0.05));
      cell.q95.push_back(quantile_sorted(sorted, 0.95));
      cell.null_count.push_back(p.runs - cell.failures.size() - sorted.size());
      cell.ratio_mean.push_back(rs.mean);
      cell.ratio_se.push_back(rs.se);
    }
    res.cells.push_back(std::move(cell));
  }
  return res;
}

std::string fan_csv(const ConvergenceResult& res) {
  std::string out = "t,N,mean,q05,q95,limit,null_count\n";
  for (const auto& c : res.cells)
    for (std::size_t k = 0; k < res.t.size(); ++k)
      out += csv_real(res.t[k]) + ',' + std::to_string(c.n) + ',' + csv_real(c.mean[k]) + ',' + csv_real(c.q05[k]) +
             ',' + csv_real(c.q95[k]) + ',' + csv_real(res.limit[k]) + ',' + std::to_string(c.null_count[k]) + '\n';
  return out;
}

std::string size_ratio_csv(const ConvergenceResult& res) {
  std::string out = "t,N,ratio_mean,ratio_se,n_limit\n";
  for (const auto& c : res.cells)
    for (std::size_t k = 0; k < res.t.size(); ++k)
      out += csv_real(res.t[k]) + ',' + std::to_string(c.n) + ',' + csv_real(c.ratio_mean[k]) + ',' +
             csv_real(c.ratio_se[k]) + ',' + csv_real(res.n_limit[k]) + '\n';
  return out;
}

// ---------------------------------------------------------------------------

CapitalResult capital_distribution_experiment(const CapitalParams& p) {
  if (!(p.threshold > 0.0)) throw DomainError("threshold D must be positive");
  if (p.n_list.empty()) throw DomainError("N list must be nonempty");
  if (p.runs < 1) throw DomainError("run count must be >= 1");
  p.spec.validate();
  CapitalResult res;
  auto options = grid_only(p.dt_max, p.event_cap);
  options.snapshot_times = {p.time};
  for (std::int64_t n : p.n_list) {
    CapitalCell cell;
    cell.n = n;
    const InitialCondition init{n, p.init, {}};
    auto ens = run_ensemble(spec_at_count(p.spec, n), init, p.runs, p.time, p.time,
                            derive_id(p.seed, static_cast<std::uint64_t>(n)), options, p.threads);
    cell.failures = std::move(ens.failures);
    cell.d.assign(p.runs, kNaN);
    for (std::size_t r = 0; r < p.runs; ++r) {
      const auto& snaps = ens.paths[r].snapshots;
      if (snaps.empty()) continue;
      if (snaps.back().second.empty()) {
        ++cell.missing;
        continue;
      }
      cell.d[r] = fraction_below(snaps.back().second, p.threshold);
    }
    cell.stats = mean_se(cell.d);
    res.cells.push_back(std::move(cell));
  }
  return res;
}

std::string histogram_csv(const CapitalResult& res) {
  std::string out = "N,run,d_N\n";
  for (const auto& c : res.cells)
    for (std::size_t r = 0; r < c.d.size(); ++r)
      out += std::to_string(c.n) + ',' + std::to_string(r) + ',' + csv_real(c.d[r]) + '\n';
  return out;
}

// ---------------------------------------------------------------------------

ChaosResult chaos_experiment(const ChaosParams& p) {
  if (p.n_list.empty()) throw DomainError("N list must be nonempty");
  for (auto n : p.n_list)
    if (n < 2) throw DomainError("the chaos experiment needs N >= 2");
  p.spec.validate();
  p.limit.validate();

  ChaosResult res;
  res.t = time_grid(p.horizon, p.grid_dt);
  const std::size_t nt = res.t.size();

  // Mean trajectory (and setting-2 scale) driving the tagged bank.
  std::vector<double> m_grid, n_grid, k_grid;
  const bool setting2 = std::holds_alternative<Setting2>(p.spec.scaling);
  const double m0 = mean(p.init);
  if (auto sol = limit_solution(p.spec, p.limit, m0, p.horizon, p.ode_dt)) {
    m_grid = sol->m;
    n_grid = sol->n_inf;
  } else if (setting2) {
    auto run = run_particles_setting2(p.limit, p.particles, p.init, p.horizon, p.ode_dt, derive_id(p.seed, 1));
    m_grid = run.run.mean;
    n_grid = run.n_inf;
    k_grid = run.run.kappa_moment;
  } else {
    auto run = run_particles(p.limit, p.particles, p.init, p.horizon, p.ode_dt, derive_id(p.seed, 1));
    m_grid = std::move(run.mean);
    k_grid = std::move(run.kappa_moment);
  }
  const auto curve = run_tagged_bank(p.limit, p.x1, m_grid, n_grid.empty() ? nullptr : &n_grid,
                                     k_grid.empty() ? nullptr : &k_grid, p.horizon, p.ode_dt,
                                     p.oracle_runs, derive_id(p.seed, 0), {}, p.threads);
  for (double t : res.t) {
    const auto i = grid_index(t, p.ode_dt, curve.t.size());
    res.surv_oracle.push_back(curve.survival[i]);
    res.oracle_se.push_back(curve.se[i]);
  }

  for (std::int64_t n : p.n_list) {
    ChaosCell cell;
    cell.n = n;
    const InitialCondition init{n, p.init, {{1, p.x1}, {2, p.x1}}};
    auto options = grid_only(p.dt_max, p.event_cap);
    options.tracked_ids = {1, 2};
    auto ens = run_ensemble(spec_at_count(p.spec, n), init, p.runs, p.horizon, p.grid_dt,
                            derive_id(p.seed, static_cast<std::uint64_t>(n)), options, p.threads);
    cell.failures = std::move(ens.failures);
    for (std::size_t k = 0; k < nt; ++k) {
      std::size_t ok = 0, alive = 0;
      std::vector<double> a, b;
      for (const auto& path : ens.paths) {
        if (path.tracked.size() != 2 || path.tracked[0].reserve.size() != nt) continue;
        ++ok;
        const double x = path.tracked[0].reserve[k];
        const double y = path.tracked[1].reserve[k];
        if (!std::isnan(x)) ++alive;
        if (!std::isnan(x) && !std::isnan(y)) {
          a.push_back(std::log(x));
          b.push_back(std::log(y));
        }
      }
      cell.surv_finite.push_back(ok ? static_cast<double>(alive) / static_cast<double>(ok) : kNaN);
      cell.corr.push_back(pearson(a, b));
      cell.n_eff.push_back(a.size());
      cell.low_power.push_back(a.size() < 30);
    }
    res.cells.push_back(std::move(cell));
  }
  return res;
}

std::string chaos_csv(const ChaosResult& res, std::size_t cell) {
  const auto& c = res.cells.at(cell);
  std::string out = "t,surv_finite,surv_oracle,corr,n_eff\n";
  for (std::size_t k = 0; k < res.t.size(); ++k)
    out += csv_real(res.t[k]) + ',' + csv_real(c.surv_finite[k]) + ',' + csv_real(res.surv_oracle[k]) + ',' +
           csv_real(c.corr[k]) + ',' + std::to_string(c.n_eff[k]) + '\n';
  return out;
}

// ---------------------------------------------------------------------------

std::optional<ModelSpec> optional_model(const Config& cfg) {
  if (!cfg.has("model.r") && !cfg.has("model.birth_rate.form")) return std::nullopt;
  return model_from_config(cfg);
}

namespace {

std::optional<MeanFieldLimit> optional_limit(const Config& cfg, const ModelSpec& spec) {
  if (cfg.has("limit.lambda.form") || cfg.has("limit.kappa.form")) return limit_from_config(cfg, spec);
  try {
    return derive_limit(spec);
  } catch (const ConfigError&) {
    return std::nullopt;
  }
}

std::vector<std::int64_t> int_list_or(const Config& cfg, const std::string& key, std::vector<std::int64_t> fallback) {
  return cfg.has(key) ? cfg.get_int_list(key) : fallback;
}

}  // namespace

ConvergenceParams convergence_params(const Config& cfg) {
  ConvergenceParams p;
  p.spec = model_from_config(cfg);
  p.limit = optional_limit(cfg, p.spec);
  p.init = dist_from_config(cfg, "init");
  p.n_list = int_list_or(cfg, "experiment.n_list", p.n_list);
  p.runs = static_cast<std::size_t>(cfg.get_int("experiment.runs", 100));
  p.horizon = cfg.get_double("experiment.horizon", p.horizon);
  p.grid_dt = cfg.get_double("experiment.grid_dt", p.grid_dt);
  p.dt_max = cfg.get_double("sim.dt_max", p.dt_max);
  p.ode_dt = cfg.get_double("ode.dt", p.ode_dt);
  p.event_cap = cfg.get_u64("sim.event_cap", p.event_cap);
  p.seed = cfg.get_u64("seed", 1);
  return p;
}

CapitalParams capital_params(const Config& cfg) {
  CapitalParams p;
  p.spec = model_from_config(cfg);
  p.init = dist_from_config(cfg, "init");
  p.n_list = int_list_or(cfg, "capital.n_list", int_list_or(cfg, "experiment.n_list", p.n_list));
  p.runs = static_cast<std::size_t>(cfg.get_int("capital.runs", cfg.get_int("experiment.runs", 100)));
  p.threshold = cfg.get_double("capital.d", p.threshold);
  p.time = cfg.get_double("capital.t", cfg.get_double("experiment.horizon", p.time));
  p.dt_max = cfg.get_double("sim.dt_max", p.dt_max);
  p.event_cap = cfg.get_u64("sim.event_cap", p.event_cap);
  p.seed = cfg.get_u64("seed", 1);
  return p;
}

ChaosParams chaos_params(const Config& cfg) {
  ChaosParams p;
  p.spec = model_from_config(cfg);
  p.limit = limit_from_config(cfg, p.spec);
  p.init = dist_from_config(cfg, "init");
  p.n_list = int_list_or(cfg, "chaos.n_list", p.n_list);
  p.runs = static_cast<std::size_t>(cfg.get_int("chaos.runs", static_cast<std::int64_t>(p.runs)));
  p.horizon = cfg.get_double("chaos.horizon", p.horizon);
  p.grid_dt = cfg.get_double("chaos.grid_dt", p.grid_dt);
  p.x1 = cfg.get_double("chaos.x1", p.x1);
  p.oracle_runs = static_cast<std::size_t>(cfg.get_int("chaos.oracle_runs", static_cast<std::int64_t>(p.oracle_runs)));
  p.particles = static_cast<std::size_t>(cfg.get_int("chaos.particles", static_cast<std::int64_t>(p.particles)));
  p.ode_dt = cfg.get_double("ode.dt", p.ode_dt);
  p.dt_max = cfg.get_double("sim.dt_max", p.dt_max);
  p.event_cap = cfg.get_u64("sim.event_cap", p.event_cap);
  p.seed = cfg.get_u64("seed", 1);
  return p;
}

// ---------------------------------------------------------------------------

std::string ExperimentManifest::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    h ^= 0xff;
    h *= 0x100000001b3ull;
  };
  feed(BANKSIM_VERSION);
  feed(kind);
  feed(config.to_text());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string ExperimentManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["kind"] = kind;
  doc["version"] = BANKSIM_VERSION;
  doc["hash"] = hash();
  doc["seed"] = config.get_string("seed", "");
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config.entries()) cfg[k] = v;
  doc["config"] = std::move(cfg);
  doc["outputs"] = outputs;
  doc["failures"] = failures;
  nlohmann::ordered_json sum = nlohmann::ordered_json::object();
  for (const auto& [k, v] : summary) sum[k] = v;
  doc["summary"] = std::move(sum);
  return doc.dump(2) + '\n';
}

}  // namespace banksim
