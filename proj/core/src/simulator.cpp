#include "banksim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "banksim/error.hpp"
#include "banksim/parallel.hpp"

namespace banksim {

SystemState SystemState::from_reserves(const std::vector<double>& reserves, double time) {
  SystemState state;
  state.time = time;
  state.banks.reserve(reserves.size());
  for (std::size_t i = 0; i < reserves.size(); ++i) state.banks.push_back({i + 1, reserves[i]});
  state.max_id = reserves.size();
  state.validate();
  return state;
}

double SystemState::total() const noexcept {
  double s = 0.0;
  for (const auto& b : banks) s += b.reserve;
  return s;
}

double SystemState::mean() const {
  if (banks.empty()) throw EmptyState();
  return total() / static_cast<double>(banks.size());
}

std::vector<double> SystemState::reserves() const {
  std::vector<double> out;
  out.reserve(banks.size());
  for (const auto& b : banks) out.push_back(b.reserve);
  return out;
}

const Bank* SystemState::find(std::uint64_t id) const noexcept {
  auto it = std::lower_bound(banks.begin(), banks.end(), id,
                             [](const Bank& b, std::uint64_t v) { return b.id < v; });
  return it != banks.end() && it->id == id ? &*it : nullptr;
}

void SystemState::validate() const {
  if (!std::isfinite(time) || time < 0.0) throw DomainError("state time must be finite and >= 0");
  std::uint64_t prev = 0;
  for (const auto& b : banks) {
    if (!(b.reserve > 0.0) || !std::isfinite(b.reserve))
      throw DomainError("bank " + std::to_string(b.id) + " has a non-positive reserve");
    if (b.id <= prev) throw DomainError("bank ids must be strictly increasing and positive");
    prev = b.id;
  }
  if (prev > max_id) throw DomainError("max_id is below a live bank id");
}

// ---------------------------------------------------------------------------

FiniteSystem::FiniteSystem(ModelSpec spec, SystemState initial, std::uint64_t seed,
                           std::uint64_t event_cap)
    : spec_(std::move(spec)),
      state_(std::move(initial)),
      seed_(seed),
      event_cap_(event_cap),
      clock_(seed, stream_id(0, Purpose::kSystemClock)),
      births_(seed, stream_id(0, Purpose::kBirthSize)) {
  spec_.validate();
  state_.validate();
  bank_streams_.reserve(state_.banks.size());
  for (const auto& b : state_.banks) bank_streams_.push_back(streams_for(b.id));
  lazy_ = default_rate_x_independent(spec_) && birth_rate_bound(spec_).per_reserve == 0.0;
  stamp_.assign(state_.banks.size(), state_.time);
}

const SystemState& FiniteSystem::state() {
  sync_all();
  return state_;
}

void FiniteSystem::sync(std::size_t i) {
  const double h = state_.time - stamp_[i];
  if (h <= 0.0) return;
  const double z = bank_streams_[i].brownian.normal();
  state_.banks[i].reserve *= std::exp((spec_.r - 0.5 * spec_.sigma * spec_.sigma) * h + spec_.sigma * std::sqrt(h) * z);
  stamp_[i] = state_.time;
}

void FiniteSystem::sync_all() {
  for (std::size_t i = 0; i < state_.banks.size(); ++i) sync(i);
}

FiniteSystem::BankStreams FiniteSystem::streams_for(std::uint64_t id) const {
  return {RngStream(seed_, stream_id(id, Purpose::kBrownian)),
          RngStream(seed_, stream_id(id, Purpose::kContagion))};
}

void FiniteSystem::diffuse(double h) {
  if (h <= 0.0) return;
  if (lazy_) {
    state_.time += h;
    return;
  }
  const double drift = (spec_.r - 0.5 * spec_.sigma * spec_.sigma) * h;
  const double vol = spec_.sigma * std::sqrt(h);
  for (std::size_t i = 0; i < state_.banks.size(); ++i) {
    const double z = bank_streams_[i].brownian.normal();
    state_.banks[i].reserve *= std::exp(drift + vol * z);
  }
  state_.time += h;
  for (auto& st : stamp_) st = state_.time;
}

EventRecord FiniteSystem::apply_birth() {
  const double x = sample(birth_law(spec_, state_.count()), births_);
  if (!(x > 0.0) || !std::isfinite(x)) throw NumericalBlowup("birth size is not positive and finite");
  const std::uint64_t id = ++state_.max_id;
  state_.banks.push_back({id, x});
  bank_streams_.push_back(streams_for(id));
  stamp_.push_back(state_.time);
  return {state_.time, BirthEvent{id, x}};
}

EventRecord FiniteSystem::apply_default(std::size_t index) {
  const std::int64_t n_before = state_.count();
  sync(index);
  const Bank gone = state_.banks[index];
  state_.banks.erase(state_.banks.begin() + static_cast<std::ptrdiff_t>(index));
  bank_streams_.erase(bank_streams_.begin() + static_cast<std::ptrdiff_t>(index));
  stamp_.erase(stamp_.begin() + static_cast<std::ptrdiff_t>(index));
  DefaultEvent ev{gone.id, gone.reserve, {}};
  if (record_impacts_) ev.impacts.reserve(state_.banks.size());
  for (std::size_t i = 0; i < state_.banks.size(); ++i) {
    const double xi = sample_contagion(spec_, n_before, bank_streams_[i].contagion);
    state_.banks[i].reserve *= 1.0 - xi;
    if (record_impacts_) ev.impacts.push_back(xi);
  }
  return {state_.time, std::move(ev)};
}

void FiniteSystem::count_event() {
  if (++events_ > event_cap_)
    throw ExplosionSuspected("event count exceeded " + std::to_string(event_cap_) + " at t=" +
                             std::to_string(state_.time));
}

std::optional<EventRecord> FiniteSystem::next_event(double dt_max) {
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw DomainError("dt_max must be positive");
  const std::int64_t n = state_.count();
  const double s = state_.total();

  const AffineBound lb = birth_rate_bound(spec_);
  double s_env = s;
  if (lb.per_reserve > 0.0)
    s_env = s * std::exp(std::max(spec_.r, 0.0) * dt_max + 8.0 * spec_.sigma * std::sqrt(dt_max));
  const double lambda_bar = lb.constant + lb.per_bank * static_cast<double>(n) + lb.per_reserve * s_env;
  const double kappa_bar = n > 0 ? default_rate_bound(spec_, n, s) : 0.0;
  const double bound = lambda_bar + static_cast<double>(n) * kappa_bar;

  double remaining = dt_max;
  if (!(bound > 0.0)) {
    diffuse(remaining);
    return std::nullopt;
  }
  for (;;) {
    const double tau = clock_.exponential(bound);
    if (tau >= remaining) {
      diffuse(remaining);
      return std::nullopt;
    }
    diffuse(tau);
    remaining -= tau;

    if (lazy_) {
      const double lambda = birth_rate(spec_, n, s);
      const double kappa = n > 0 ? default_rate(spec_, n, s, state_.banks[0].reserve) : 0.0;
      const double total = lambda + static_cast<double>(n) * kappa;
      if (total > bound * (1.0 + 1e-12)) ++bound_violations_;
      const double u = clock_.uniform() * bound;
      if (u >= total) continue;
      count_event();
      const double defaults = static_cast<double>(n) * kappa;
      if (u < defaults)
        return apply_default(std::min(static_cast<std::size_t>(u / kappa), static_cast<std::size_t>(n - 1)));
      return apply_birth();
    }

    const double s_now = state_.total();
    const double lambda = birth_rate(spec_, n, s_now);
    kappa_scratch_.resize(static_cast<std::size_t>(n));
    double total = lambda;
    for (std::size_t i = 0; i < kappa_scratch_.size(); ++i) {
      kappa_scratch_[i] = default_rate(spec_, n, s_now, state_.banks[i].reserve);
      total += kappa_scratch_[i];
    }
    if (total > bound * (1.0 + 1e-12)) ++bound_violations_;

    // Defaults in id order, then birth, share one uniform on [0, bound).
    double u = clock_.uniform() * bound;
    if (u >= total) continue;
    count_event();
    for (std::size_t i = 0; i < kappa_scratch_.size(); ++i) {
      if (u < kappa_scratch_[i]) return apply_default(i);
      u -= kappa_scratch_[i];
    }
    return apply_birth();
  }
}

void FiniteSystem::advance_to(double target, double dt_max, std::vector<EventRecord>* log) {
  constexpr double kSnap = 1e-12;
  while (target - state_.time > kSnap) {
    auto ev = next_event(std::min(dt_max, target - state_.time));
    if (ev && log) log->push_back(std::move(*ev));
  }
  state_.time = std::max(state_.time, target);
}

// ---------------------------------------------------------------------------

std::vector<double> time_grid(double horizon, double grid_dt) {
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be >= 0");
  if (!(grid_dt > 0.0)) throw DomainError("grid_dt must be positive");
  const auto steps = static_cast<std::int64_t>(std::llround(horizon / grid_dt));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (std::int64_t k = 0; k <= steps; ++k) grid.push_back(static_cast<double>(k) * grid_dt);
  if (grid.back() < horizon - 1e-9 * std::max(1.0, horizon)) grid.push_back(horizon);
  return grid;
}

namespace {

GridPoint grid_point(const SystemState& st, double t) {
  const double s = st.total();
  const auto n = st.count();
  return {t, n, s, n > 0 ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN()};
}

}  // namespace

PathRecord run_path(const ModelSpec& spec, const SystemState& init, double horizon, double grid_dt,
                    std::uint64_t seed, const SimulationOptions& options) {
  const auto grid = time_grid(horizon, grid_dt);
  std::vector<std::size_t> snap_idx;
  for (double ts : options.snapshot_times) {
    auto it = std::min_element(grid.begin(), grid.end(),
                               [ts](double a, double b) { return std::abs(a - ts) < std::abs(b - ts); });
    if (std::abs(*it - ts) > 1e-9 * std::max(1.0, ts))
      throw DomainError("snapshot time " + std::to_string(ts) + " is not on the output grid");
    snap_idx.push_back(static_cast<std::size_t>(it - grid.begin()));
  }

  FiniteSystem sys(spec, init, seed, options.event_cap);
  sys.set_record_impacts(options.record_impacts);
  PathRecord rec;
  rec.seed = seed;
  rec.grid.reserve(grid.size());
  for (auto id : options.tracked_ids) rec.tracked.push_back({id, {}});

  const double t0 = init.time;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    sys.advance_to(t0 + grid[k], options.dt_max, options.record_events ? &rec.events : nullptr);
    const auto& st = sys.state();
    rec.grid.push_back(grid_point(st, grid[k]));
    for (auto& tb : rec.tracked) {
      const Bank* b = st.find(tb.id);
      tb.reserve.push_back(b ? b->reserve : std::numeric_limits<double>::quiet_NaN());
    }
    for (std::size_t j = 0; j < snap_idx.size(); ++j)
      if (snap_idx[j] == k) rec.snapshots.emplace_back(grid[k], st.measure());
  }
  rec.event_count = sys.event_count();
  rec.bound_violations = sys.bound_violations();
  return rec;
}

SystemState InitialCondition::sample(std::uint64_t seed) const {
  if (count < 0) throw DomainError("initial count must be >= 0");
  RngStream rng(seed, stream_id(0, Purpose::kInitial));
  std::vector<double> reserves(static_cast<std::size_t>(count));
  for (auto& x : reserves) x = banksim::sample(dist, rng);
  for (const auto& [id, x] : fixed) {
    if (id == 0 || id > reserves.size()) throw DomainError("pinned bank id outside 1..N0");
    reserves[id - 1] = x;
  }
  return SystemState::from_reserves(reserves);
}

EnsembleResult run_ensemble(const ModelSpec& spec, const InitialCondition& init, std::size_t runs,
                            double horizon, double grid_dt, std::uint64_t seed,
                            const SimulationOptions& options, unsigned threads) {
  spec.validate();
  EnsembleResult out;
  out.paths.resize(runs);
  std::vector<std::optional<std::string>> errors(runs);
  parallel_for(runs, threads, [&](std::size_t i) {
    const std::uint64_t s = run_seed(seed, i);
    try {
      out.paths[i] = run_path(spec, init.sample(s), horizon, grid_dt, s, options);
    } catch (const Error& e) {
      out.paths[i] = PathRecord{};
      out.paths[i].seed = s;
      errors[i] = e.what();
    }
    out.paths[i].run_index = i;
  });
  for (std::size_t i = 0; i < runs; ++i)
    if (errors[i]) out.failures.push_back({i, *errors[i]});
  return out;
}

}  // namespace banksim
