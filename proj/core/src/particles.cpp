#include "banksim/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "banksim/error.hpp"
#include "banksim/ode.hpp"
#include "banksim/parallel.hpp"

namespace banksim {

ParticleEnsemble::ParticleEnsemble(std::vector<double> r, std::uint64_t seed)
    : reserves(std::move(r)),
      brownian(seed, stream_id(0, Purpose::kBrownian)),
      regeneration(seed, stream_id(0, Purpose::kRegeneration)),
      mutation(seed, stream_id(0, Purpose::kMutation)) {
  if (reserves.size() < 2) throw DomainError("the particle system needs at least 2 particles");
  for (double x : reserves)
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("particle reserves must be positive");
}

ParticleEnsemble ParticleEnsemble::sample(std::size_t n_prime, const DistFamily& init, std::uint64_t seed) {
  if (n_prime < 2) throw DomainError("the particle system needs at least 2 particles");
  RngStream rng(seed, stream_id(0, Purpose::kInitial));
  std::vector<double> r(n_prime);
  for (auto& x : r) x = banksim::sample(init, rng);
  return ParticleEnsemble(std::move(r), seed);
}

double ParticleEnsemble::mean() const {
  double s = 0.0;
  for (double x : reserves) s += x;
  return s / static_cast<double>(reserves.size());
}

namespace {

constexpr double kFloor = 1e-12;

// Index of the next success among Bernoulli(p) trials, counting from `from`.
std::size_t skip_to_next(RngStream& rng, std::size_t from, double p, std::size_t limit) {
  if (p >= 1.0) return from;
  if (!(p > 0.0)) return limit;
  const double jump = std::floor(std::log(rng.uniform()) / std::log1p(-p));
  if (jump >= static_cast<double>(limit - from)) return limit;
  return from + static_cast<std::size_t>(jump);
}

double kappa_moment(const ParticleEnsemble& ens, const MeanFieldLimit& mf, double m) {
  if (mf.kappa_x_independent()) return mf.kappa_at(m, 1.0);
  double acc = 0.0;
  for (double x : ens.reserves) acc += mf.kappa_at(m, x);
  return acc / static_cast<double>(ens.reserves.size());
}

}  // namespace

StepCounts step_particles(ParticleEnsemble& ens, const MeanFieldLimit& mf, double dt, std::optional<double> n_inf) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const std::size_t n = ens.reserves.size();
  if (n < 2) throw DomainError("the particle system needs at least 2 particles");
  const double scale = n_inf.value_or(1.0);
  if (!(scale > 0.0)) throw DomainError("n_inf must be positive");

  const double m = ens.mean();
  const double lambda = mf.lambda_at(m) / scale;
  const double kappa_cap = mf.kappa_bound();
  if (dt * (lambda + kappa_cap) >= 0.1)
    throw DomainError("step too coarse: dt * (lambda + kappa bound) must stay below 0.1");

  const bool x_free = mf.kappa_x_independent();
  thread_local std::vector<double> before;
  if (!x_free) before = ens.reserves;

  const double half_var = 0.5 * mf.sigma * mf.sigma * dt;
  const double vol = mf.sigma * std::sqrt(dt);
  const double kappa_const = x_free ? mf.kappa_at(m, 1.0) : 0.0;
  const double drift = (mf.r - scale * mf.dbar * kappa_moment(ens, mf, m)) * dt - half_var;
  for (auto& x : ens.reserves) {
    x *= std::exp(drift + vol * ens.brownian.normal());
    if (!(x > kFloor)) x = kFloor;
  }

  StepCounts counts;
  const double p_regen = -std::expm1(-lambda * dt);
  for (std::size_t i = skip_to_next(ens.regeneration, 0, p_regen, n); i < n;
       i = skip_to_next(ens.regeneration, i + 1, p_regen, n)) {
    ens.reserves[i] = banksim::sample(mf.birth, ens.regeneration);
    ++counts.regenerated;
  }

  thread_local std::vector<double> source;
  source = ens.reserves;
  const double p_bar = -std::expm1(-(x_free ? kappa_const : kappa_cap) * dt);
  for (std::size_t i = skip_to_next(ens.mutation, 0, p_bar, n); i < n;
       i = skip_to_next(ens.mutation, i + 1, p_bar, n)) {
    if (!x_free) {
      const double p_i = -std::expm1(-mf.kappa_at(m, before[i]) * dt);
      if (ens.mutation.uniform() * p_bar >= p_i) continue;
    }
    auto j = static_cast<std::size_t>(ens.mutation.below(n - 1));
    if (j >= i) ++j;
    ens.reserves[i] = source[j];
    ++counts.mutated;
  }

  ens.time += dt;
  ++ens.steps;
  return counts;
}

namespace {

std::vector<std::size_t> steps_for(const std::vector<double>& times, double dt, std::size_t steps) {
  std::vector<std::size_t> out;
  for (double ts : times) {
    const auto k = std::llround(ts / dt);
    if (k < 0 || static_cast<std::size_t>(k) > steps || std::abs(static_cast<double>(k) * dt - ts) > 1e-9 * std::max(1.0, ts))
      throw DomainError("requested time " + std::to_string(ts) + " is not on the step grid");
    out.push_back(static_cast<std::size_t>(k));
  }
  return out;
}

}  // namespace

ParticleRun run_particles(const MeanFieldLimit& mf, std::size_t n_prime, const DistFamily& init, double horizon,
                          double dt, std::uint64_t seed, const ParticleOptions& options) {
  mf.validate();
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw DomainError("dt must be positive and horizon nonnegative");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  if (options.n_inf && options.n_inf->size() < steps + 1)
    throw DomainError("n_inf grid does not cover the horizon");
  const auto snap_steps = steps_for(options.snapshot_times, dt, steps);

  ParticleEnsemble ens = ParticleEnsemble::sample(n_prime, init, seed);
  ParticleRun run;
  run.dt = dt;
  run.t.resize(steps + 1);
  run.mean.resize(steps + 1);
  run.kappa_moment.resize(steps + 1);
  run.lambda.resize(steps + 1);
  for (std::size_t k = 0;; ++k) {
    const double m = ens.mean();
    run.t[k] = static_cast<double>(k) * dt;
    run.mean[k] = m;
    run.kappa_moment[k] = kappa_moment(ens, mf, m);
    run.lambda[k] = mf.lambda_at(m);
    for (std::size_t j = 0; j < snap_steps.size(); ++j)
      if (snap_steps[j] == k) run.snapshots.emplace_back(options.snapshot_times[j], EmpiricalMeasure(ens.reserves));
    if (k == steps) break;
    const std::optional<double> scale =
        options.n_inf ? std::optional<double>((*options.n_inf)[k]) : std::nullopt;
    const auto c = step_particles(ens, mf, dt, scale);
    run.regenerations += c.regenerated;
    run.mutations += c.mutated;
  }
  return run;
}

Setting2ParticleRun run_particles_setting2(const MeanFieldLimit& mf, std::size_t n_prime, const DistFamily& init,
                                           double horizon, double dt, std::uint64_t seed,
                                           std::vector<double> snapshot_times) {
  Setting2ParticleRun out;
  ParticleOptions opt;
  opt.snapshot_times = std::move(snapshot_times);
  if (mf.kappa_x_independent()) {
    const double m0 = mean(init);
    out.n_inf = solve_setting2(mf, m0, horizon, dt).n_inf;
    opt.n_inf = out.n_inf;
    out.run = run_particles(mf, n_prime, init, horizon, dt, seed, opt);
    out.iterations = 1;
    out.converged = true;
    return out;
  }
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  out.n_inf.assign(steps + 1, 1.0);
  for (int it = 1; it <= 10; ++it) {
    opt.n_inf = out.n_inf;
    out.run = run_particles(mf, n_prime, init, horizon, dt, seed, opt);
    auto next = n_infinity_general(out.run.kappa_moment, out.run.lambda, dt);
    double gap = 0.0;
    for (std::size_t k = 0; k < next.size(); ++k) gap = std::max(gap, std::abs(next[k] - out.n_inf[k]));
    out.n_inf = std::move(next);
    out.iterations = it;
    out.last_gap = gap;
    if (gap < 1e-3) {
      out.converged = true;
      break;
    }
  }
  opt.n_inf = out.n_inf;
  out.run = run_particles(mf, n_prime, init, horizon, dt, seed, opt);
  return out;
}

namespace {

struct KilledRun {
  std::optional<std::size_t> kill_step;
  std::vector<double> at_marks;
};

template <class Visit>
std::optional<std::size_t> killed_diffusion(const MeanFieldLimit& mf, double x1, const std::vector<double>& m_grid,
                                            const std::vector<double>* n_grid, const std::vector<double>* kappa_grid,
                                            std::size_t steps, double dt, std::uint64_t seed, Visit&& visit) {
  if (!(x1 > 0.0)) throw DomainError("x1 must be positive");
  if (m_grid.size() < steps + 1) throw DomainError("mean trajectory does not cover the horizon");
  if (n_grid && n_grid->size() < steps + 1) throw DomainError("n_inf grid does not cover the horizon");
  if (kappa_grid && kappa_grid->size() < steps + 1) throw DomainError("kappa moment grid does not cover the horizon");
  if (!kappa_grid && !mf.kappa_x_independent())
    throw DomainError("a reserve-dependent kill rate needs the population kappa moment grid");
  RngStream brownian(seed, stream_id(1, Purpose::kBrownian));
  RngStream killing(seed, stream_id(1, Purpose::kKilling));
  const double half_var = 0.5 * mf.sigma * mf.sigma * dt;
  const double vol = mf.sigma * std::sqrt(dt);
  double x = x1;
  visit(0, x);
  for (std::size_t k = 0; k < steps; ++k) {
    const double m = m_grid[k];
    const double scale = n_grid ? (*n_grid)[k] : 1.0;
    const double kbar = kappa_grid ? (*kappa_grid)[k] : mf.kappa_at(m, x);
    const double p_kill = -std::expm1(-mf.kappa_at(m, x) * dt);
    x *= std::exp((mf.r - scale * mf.dbar * kbar) * dt - half_var + vol * brownian.normal());
    if (killing.uniform() < p_kill) return k + 1;
    visit(k + 1, x);
  }
  return std::nullopt;
}

}  // namespace

TaggedBankPath tagged_bank_path(const MeanFieldLimit& mf, double x1, const std::vector<double>& m_grid,
                                const std::vector<double>* n_grid, const std::vector<double>* kappa_grid,
                                double horizon, double dt, std::uint64_t seed) {
  mf.validate();
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  TaggedBankPath path;
  const auto kill = killed_diffusion(mf, x1, m_grid, n_grid, kappa_grid, steps, dt, seed,
                                     [&](std::size_t, double x) { path.trajectory.push_back(x); });
  if (kill) {
    path.killed = true;
    path.kill_time = static_cast<double>(*kill) * dt;
  }
  return path;
}

SurvivalCurve run_tagged_bank(const MeanFieldLimit& mf, double x1, const std::vector<double>& m_grid,
                              const std::vector<double>* n_grid, const std::vector<double>* kappa_grid,
                              double horizon, double dt, std::size_t runs,
                              std::uint64_t seed, const std::vector<double>& marginal_times, unsigned threads) {
  mf.validate();
  if (runs < 1) throw DomainError("run count must be >= 1");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  const auto marks = steps_for(marginal_times, dt, steps);

  std::vector<KilledRun> results(runs);
  parallel_for(runs, threads, [&](std::size_t i) {
    KilledRun& res = results[i];
    res.at_marks.assign(marks.size(), std::numeric_limits<double>::quiet_NaN());
    res.kill_step = killed_diffusion(mf, x1, m_grid, n_grid, kappa_grid, steps, dt, run_seed(seed, i),
                                     [&](std::size_t k, double x) {
                                       for (std::size_t j = 0; j < marks.size(); ++j)
                                         if (marks[j] == k) res.at_marks[j] = x;
                                     });
  });

  std::vector<std::size_t> deaths(steps + 2, 0);
  for (const auto& r : results)
    if (r.kill_step) ++deaths[*r.kill_step];

  SurvivalCurve out;
  out.dt = dt;
  out.t.resize(steps + 1);
  out.survival.resize(steps + 1);
  out.se.resize(steps + 1);
  std::size_t alive = runs;
  const double rd = static_cast<double>(runs);
  for (std::size_t k = 0; k <= steps; ++k) {
    alive -= deaths[k];
    const double p = static_cast<double>(alive) / rd;
    out.t[k] = static_cast<double>(k) * dt;
    out.survival[k] = p;
    out.se[k] = std::sqrt(p * (1.0 - p) / rd);
  }
  for (std::size_t j = 0; j < marks.size(); ++j) {
    std::vector<double> xs;
    for (const auto& r : results)
      if (!std::isnan(r.at_marks[j])) xs.push_back(r.at_marks[j]);
    out.marginals.emplace_back(marginal_times[j], std::move(xs));
  }
  return out;
}

}  // namespace banksim
