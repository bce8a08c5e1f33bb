#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "banksim/limit.hpp"
#include "banksim/measure.hpp"
#include "banksim/model.hpp"
#include "banksim/rng.hpp"

namespace banksim {

/// Fixed-size interacting particle approximation of the limit dynamics.
/// Randomness comes from one stream per mechanism (diffusion, regeneration,
/// mutation), all keyed by the ensemble seed.
struct ParticleEnsemble {
  std::vector<double> reserves;
  double time = 0.0;
  std::uint64_t steps = 0;
  RngStream brownian;
  RngStream regeneration;
  RngStream mutation;

  ParticleEnsemble(std::vector<double> reserves, std::uint64_t seed);
  static ParticleEnsemble sample(std::size_t n_prime, const DistFamily& init, std::uint64_t seed);

  double mean() const;
};

struct StepCounts {
  std::size_t regenerated = 0;
  std::size_t mutated = 0;
};

/// One explicit step: exact log-GBM move with drift r - Dbar (nu, kappa)
/// evaluated at the pre-step state, then regeneration from B_inf, then mutation onto a copy of
/// a uniformly chosen other particle (taken after regeneration). A setting-2
/// n_inf scales the contagion drift by n_inf and the birth rate by 1 / n_inf.
StepCounts step_particles(ParticleEnsemble& ens, const MeanFieldLimit& mf, double dt,
                          std::optional<double> n_inf = std::nullopt);

struct ParticleOptions {
  std::vector<double> snapshot_times;
  /// Setting-2 scale on t_k = k * dt; must cover the horizon.
  std::optional<std::vector<double>> n_inf;
};

struct ParticleRun {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> mean;
  /// (nu_t, kappa_inf(m_t, .)) and lambda_inf(m_t) on the same grid
  std::vector<double> kappa_moment;
  std::vector<double> lambda;
  std::vector<std::pair<double, EmpiricalMeasure>> snapshots;
  std::uint64_t regenerations = 0;
  std::uint64_t mutations = 0;
};

ParticleRun run_particles(const MeanFieldLimit& mf, std::size_t n_prime, const DistFamily& init,
                          double horizon, double dt, std::uint64_t seed, const ParticleOptions& options = {});

struct Setting2ParticleRun {
  ParticleRun run;
  std::vector<double> n_inf;
  int iterations = 0;
  bool converged = false;
  double last_gap = 0.0;
};

/// Setting-2 particle system. With a reserve-independent kill rate n_inf comes
/// from the mean ODE; otherwise it is iterated to self-consistency (sup gap
/// below 1e-3, at most 10 passes, same seed every pass).
Setting2ParticleRun run_particles_setting2(const MeanFieldLimit& mf, std::size_t n_prime, const DistFamily& init,
                                           double horizon, double dt, std::uint64_t seed,
                                           std::vector<double> snapshot_times = {});

struct TaggedBankPath {
  std::vector<double> trajectory;  // on t_k = k * dt up to killing
  bool killed = false;
  std::optional<double> kill_time;
};

/// One killed diffusion started at x1, driven by the mean trajectory m_grid
/// (and n_grid in setting 2), all grids on t_k = k * dt. The contagion drift
/// uses kappa_grid, the population mean of kappa; it may be null when kappa
/// does not depend on the reserve.
TaggedBankPath tagged_bank_path(const MeanFieldLimit& mf, double x1, const std::vector<double>& m_grid,
                                const std::vector<double>* n_grid, const std::vector<double>* kappa_grid,
                                double horizon, double dt, std::uint64_t seed);

struct SurvivalCurve {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> survival;
  std::vector<double> se;
  /// Reserves of surviving paths at the requested times.
  std::vector<std::pair<double, std::vector<double>>> marginals;
};

SurvivalCurve run_tagged_bank(const MeanFieldLimit& mf, double x1, const std::vector<double>& m_grid,
                              const std::vector<double>* n_grid, const std::vector<double>* kappa_grid,
                              double horizon, double dt, std::size_t runs,
                              std::uint64_t seed, const std::vector<double>& marginal_times = {},
                              unsigned threads = 0);

}  // namespace banksim
