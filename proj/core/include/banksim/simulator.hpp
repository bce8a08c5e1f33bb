#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "banksim/measure.hpp"
#include "banksim/model.hpp"
#include "banksim/rng.hpp"

namespace banksim {

struct Bank {
  std::uint64_t id = 0;
  double reserve = 0.0;
  bool operator==(const Bank&) const = default;
};

/// Living banks ordered by id, the largest id ever issued, and the clock.
struct SystemState {
  std::vector<Bank> banks;
  std::uint64_t max_id = 0;
  double time = 0.0;

  /// Banks 1..n with the given reserves; max_id = n.
  static SystemState from_reserves(const std::vector<double>& reserves, double time = 0.0);

  std::int64_t count() const noexcept { return static_cast<std::int64_t>(banks.size()); }
  double total() const noexcept;
  /// Mean reserve. Throws EmptyState.
  double mean() const;
  std::vector<double> reserves() const;
  EmpiricalMeasure measure() const { return EmpiricalMeasure(reserves()); }
  const Bank* find(std::uint64_t id) const noexcept;
  /// Throws DomainError when an invariant is violated.
  void validate() const;

  bool operator==(const SystemState&) const = default;
};

struct BirthEvent {
  std::uint64_t id = 0;
  double reserve = 0.0;
  bool operator==(const BirthEvent&) const = default;
};

struct DefaultEvent {
  std::uint64_t id = 0;
  double reserve = 0.0;
  /// Fraction removed from each survivor, in survivor order. Empty when
  /// impact recording is disabled.
  std::vector<double> impacts;
  bool operator==(const DefaultEvent&) const = default;
};

struct EventRecord {
  double time = 0.0;
  std::variant<BirthEvent, DefaultEvent> kind;
  bool operator==(const EventRecord&) const = default;
};

struct SimulationOptions {
  double dt_max = 0.01;
  std::uint64_t event_cap = 10'000'000;
  bool record_events = true;
  bool record_impacts = true;
  /// Times (multiples of grid_dt) at which the full empirical measure is kept.
  std::vector<double> snapshot_times;
  /// Bank ids whose reserves are recorded on the grid (NaN while not alive).
  std::vector<std::uint64_t> tracked_ids;
};

/// Exact simulation of the finite banking system. Reserves move as
/// independent geometric Brownian motions between events; birth and default
/// times come from thinning against per-step rate bounds. Each bank owns
/// Brownian and contagion streams keyed by (bank id, purpose).
class FiniteSystem {
 public:
  FiniteSystem(ModelSpec spec, SystemState initial, std::uint64_t seed,
               std::uint64_t event_cap = 10'000'000);

  /// Current state; brings every reserve up to the clock first.
  const SystemState& state();
  const ModelSpec& spec() const noexcept { return spec_; }
  std::uint64_t event_count() const noexcept { return events_; }
  /// Candidates whose actual intensity exceeded the thinning bound (only
  /// possible for reserve-dependent birth rates).
  std::uint64_t bound_violations() const noexcept { return bound_violations_; }
  void set_record_impacts(bool on) noexcept { record_impacts_ = on; }

  /// Advances to the next birth/default or by dt_max, whichever is sooner.
  std::optional<EventRecord> next_event(double dt_max);

  /// Runs next_event until the clock reaches `target`; events are appended
  /// to `log` when non-null.
  void advance_to(double target, double dt_max, std::vector<EventRecord>* log);

 private:
  struct BankStreams {
    RngStream brownian;
    RngStream contagion;
  };

  BankStreams streams_for(std::uint64_t id) const;
  void diffuse(double h);
  void sync(std::size_t index);
  void sync_all();
  void count_event();
  EventRecord apply_birth();
  EventRecord apply_default(std::size_t index);

  ModelSpec spec_;
  SystemState state_;
  std::uint64_t seed_;
  std::uint64_t event_cap_;
  RngStream clock_;
  RngStream births_;
  std::vector<BankStreams> bank_streams_;
  // When no rate reads reserves, each bank is only moved to the clock when
  // observed; stamp_[i] is the time its stored reserve refers to.
  bool lazy_ = false;
  std::vector<double> stamp_;
  std::vector<double> kappa_scratch_;
  std::uint64_t events_ = 0;
  std::uint64_t bound_violations_ = 0;
  bool record_impacts_ = true;
};

struct GridPoint {
  double t = 0.0;
  std::int64_t n = 0;
  double s = 0.0;
  /// Mean reserve; NaN when the system is empty.
  double m = 0.0;
};

struct TrackedBank {
  std::uint64_t id = 0;
  std::vector<double> reserve;
};

struct PathRecord {
  std::vector<GridPoint> grid;
  std::vector<EventRecord> events;
  std::vector<std::pair<double, EmpiricalMeasure>> snapshots;
  std::vector<TrackedBank> tracked;
  std::uint64_t seed = 0;
  std::uint64_t run_index = 0;
  std::uint64_t event_count = 0;
  std::uint64_t bound_violations = 0;
};

/// Grid times k * grid_dt for k = 0..round(horizon / grid_dt).
std::vector<double> time_grid(double horizon, double grid_dt);

PathRecord run_path(const ModelSpec& spec, const SystemState& init, double horizon, double grid_dt,
                    std::uint64_t seed, const SimulationOptions& options = {});

/// How ensemble members draw their initial state.
struct InitialCondition {
  std::int64_t count = 0;
  DistFamily dist = Exponential{1.0};
  /// Reserves pinned for specific ids (1-based); the rest are drawn from dist.
  std::vector<std::pair<std::uint64_t, double>> fixed;

  SystemState sample(std::uint64_t seed) const;
};

struct RunFailure {
  std::uint64_t run_index = 0;
  std::string message;
};

struct EnsembleResult {
  /// Ordered by run index. Failed runs keep an empty grid.
  std::vector<PathRecord> paths;
  std::vector<RunFailure> failures;
};

/// R independent paths; run i uses seed run_seed(seed, i) for both its
/// initial state and its dynamics, so results do not depend on `threads`.
EnsembleResult run_ensemble(const ModelSpec& spec, const InitialCondition& init, std::size_t runs,
                            double horizon, double grid_dt, std::uint64_t seed,
                            const SimulationOptions& options = {}, unsigned threads = 0);

}  // namespace banksim
