#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "banksim/config.hpp"
#include "banksim/limit.hpp"
#include "banksim/model.hpp"
#include "banksim/ode.hpp"
#include "banksim/particles.hpp"
#include "banksim/simulator.hpp"

namespace banksim {

// ---------------------------------------------------------------------------
// Small statistics helpers
// ---------------------------------------------------------------------------

/// Linear-interpolation sample quantile (R type 7) of sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q);
/// Pearson correlation; NaN with fewer than 2 pairs or zero variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b);
struct MeanSe {
  double mean = 0.0;
  double sd = 0.0;
  double se = 0.0;
  std::size_t count = 0;
};
/// Ignores NaN entries.
MeanSe mean_se(const std::vector<double>& values);
/// True if the sequence both strictly rises and strictly falls somewhere.
bool non_monotone(const std::vector<double>& values, double tol = 1e-12);

/// Gaussian kernel density of `samples` on `grid` (Silverman bandwidth when
/// bandwidth <= 0).
std::vector<double> gaussian_kde(const std::vector<double>& samples, const std::vector<double>& grid,
                                 double bandwidth = 0.0);

/// The model at initial count n (setting 2 takes N0 = n).
ModelSpec spec_at_count(const ModelSpec& spec, std::int64_t n);

// ---------------------------------------------------------------------------
// Convergence fans
// ---------------------------------------------------------------------------

struct ConvergenceParams {
  ModelSpec spec;
  std::optional<MeanFieldLimit> limit;
  DistFamily init = Exponential{1.0};
  std::vector<std::int64_t> n_list{5, 25, 100};
  std::size_t runs = 100;
  double horizon = 10.0;
  double grid_dt = 0.1;
  double dt_max = 0.01;
  double ode_dt = 1e-3;
  std::uint64_t event_cap = 10'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct ConvergenceCell {
  std::int64_t n = 0;
  /// m_N(t) per [time][run]; NaN when the system is empty
  std::vector<std::vector<double>> m;
  /// N_N(t) / N per [time][run]
  std::vector<std::vector<double>> ratio;
  std::vector<double> mean, q05, q95, mean_se;
  std::vector<double> ratio_mean, ratio_se;
  std::vector<std::size_t> null_count;
  std::vector<RunFailure> failures;
  bool failed = false;
};

struct ConvergenceResult {
  std::vector<double> t;
  /// Limit mean and (setting 2) N_inf on the output grid; NaN when unavailable.
  std::vector<double> limit;
  std::vector<double> n_limit;
  std::optional<OdeSolution> ode;
  bool limit_non_monotone = false;
  std::vector<ConvergenceCell> cells;
};

/// The limit trajectory used by the harness, solved with the setting of `spec`.
std::optional<OdeSolution> limit_solution(const ModelSpec& spec, const std::optional<MeanFieldLimit>& limit,
                                          double m0, double horizon, double ode_dt);

ConvergenceResult convergence_experiment(const ConvergenceParams& p);
/// t,N,mean,q05,q95,limit,null_count
std::string fan_csv(const ConvergenceResult& res);
/// t,N,ratio_mean,ratio_se,n_limit
std::string size_ratio_csv(const ConvergenceResult& res);

// ---------------------------------------------------------------------------
// Capital distribution
// ---------------------------------------------------------------------------

struct CapitalParams {
  ModelSpec spec;
  DistFamily init = Exponential{1.0};
  std::vector<std::int64_t> n_list{5, 25, 100};
  std::size_t runs = 100;
  double threshold = 1.0;
  double time = 10.0;
  double dt_max = 0.01;
  std::uint64_t event_cap = 10'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct CapitalCell {
  std::int64_t n = 0;
  /// Fraction of banks at or below the threshold per run; NaN if N(T) = 0
  std::vector<double> d;
  MeanSe stats;
  std::size_t missing = 0;
  std::vector<RunFailure> failures;
};

struct CapitalResult {
  std::vector<CapitalCell> cells;
};

CapitalResult capital_distribution_experiment(const CapitalParams& p);
/// N,run,d_N
std::string histogram_csv(const CapitalResult& res);

// ---------------------------------------------------------------------------
// Propagation of chaos
// ---------------------------------------------------------------------------

struct ChaosParams {
  ModelSpec spec;
  MeanFieldLimit limit;
  DistFamily init = Exponential{1.0};
  std::vector<std::int64_t> n_list{5, 200};
  std::size_t runs = 2000;
  double horizon = 5.0;
  double grid_dt = 0.1;
  /// Starting reserve of banks 1 and 2.
  double x1 = 2.0;
  std::size_t oracle_runs = 20000;
  double ode_dt = 1e-3;
  /// Particle count for the mean trajectory when no closed mean equation exists.
  std::size_t particles = 2000;
  double dt_max = 0.01;
  std::uint64_t event_cap = 10'000'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct ChaosCell {
  std::int64_t n = 0;
  std::vector<double> surv_finite;
  std::vector<double> corr;
  std::vector<std::size_t> n_eff;
  std::vector<RunFailure> failures;
  /// n_eff below 30
  std::vector<bool> low_power;
};

struct ChaosResult {
  std::vector<double> t;
  std::vector<double> surv_oracle;
  std::vector<double> oracle_se;
  std::vector<ChaosCell> cells;
};

ChaosResult chaos_experiment(const ChaosParams& p);
/// t,surv_finite,surv_oracle,corr,n_eff
std::string chaos_csv(const ChaosResult& res, std::size_t cell);

// ---------------------------------------------------------------------------
// Parameters from configuration
// ---------------------------------------------------------------------------

/// The model.* section if present.
std::optional<ModelSpec> optional_model(const Config& cfg);
ConvergenceParams convergence_params(const Config& cfg);
CapitalParams capital_params(const Config& cfg);
ChaosParams chaos_params(const Config& cfg);

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

struct ExperimentManifest {
  std::string kind;
  Config config;
  std::vector<std::string> outputs;
  std::vector<std::string> failures;
  std::map<std::string, std::string> summary;

  /// FNV-1a over the library version, kind and canonical config text.
  std::string hash() const;
  std::string to_json() const;
};

}  // namespace banksim
