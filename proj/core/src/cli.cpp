#include "banksim/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>

#include "banksim/config.hpp"
#include "banksim/error.hpp"
#include "banksim/generator.hpp"
#include "banksim/harness.hpp"
#include "banksim/io.hpp"
#include "banksim/ode.hpp"
#include "banksim/particles.hpp"
#include "banksim/simulator.hpp"

namespace banksim {

namespace fs = std::filesystem;

namespace {

struct CliConfig {
  std::string subcommand;
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool verbose = false;
};

// Writes data files into the output directory and keeps the manifest current.
class Output {
 public:
  Output(fs::path dir, ExperimentManifest manifest) : dir_(std::move(dir)), manifest_(std::move(manifest)) {}

  void begin(const std::vector<std::string>& planned) {
    fs::create_directories(dir_);
    manifest_.outputs = planned;
    flush();
  }
  void write(const std::string& name, const std::string& content) { write_file_atomic(dir_ / name, content); }
  void note(const std::string& key, const std::string& value) { manifest_.summary[key] = value; }
  void note(const std::string& key, double value) { manifest_.summary[key] = format_real(value); }
  void failure(const std::string& what) { manifest_.failures.push_back(what); }
  void flush() { write_file_atomic(dir_ / "manifest.json", manifest_.to_json()); }

 private:
  fs::path dir_;
  ExperimentManifest manifest_;
};

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool is_setting2(const Config& cfg) {
  return cfg.get_string("model.scaling", "setting1") == "setting2" || cfg.get_int("limit.setting", 1) == 2;
}

DistFamily init_or(const Config& cfg, const DistFamily& fallback) {
  return cfg.has("init.form") ? dist_from_config(cfg, "init") : fallback;
}

std::vector<double> list_or_empty(const Config& cfg, const std::string& key) {
  return cfg.has(key) ? cfg.get_double_list(key) : std::vector<double>{};
}

void cmd_simulate(const Config& cfg, const CliConfig& cli, Output& out, std::ostream& log) {
  const ModelSpec spec = model_from_config(cfg);
  InitialCondition init;
  const std::int64_t n0_default = std::max<std::int64_t>(initial_count(spec.scaling), 1);
  init.count = cfg.get_int("init.count", n0_default);
  init.dist = dist_from_config(cfg, "init");
  const double horizon = cfg.get_double("sim.horizon", 10.0);
  const double grid_dt = cfg.get_double("sim.grid_dt", 0.01);
  SimulationOptions opt;
  opt.dt_max = cfg.get_double("sim.dt_max", opt.dt_max);
  opt.event_cap = cfg.get_u64("sim.event_cap", opt.event_cap);
  opt.snapshot_times = list_or_empty(cfg, "sim.snapshot_times");
  if (cfg.has("sim.tracked"))
    for (auto id : cfg.get_int_list("sim.tracked")) opt.tracked_ids.push_back(static_cast<std::uint64_t>(id));
  const std::uint64_t seed = run_seed(cfg.get_u64("seed", 1), 0);

  out.begin({"path_grid.csv", "path_events.csv", "path.json"});
  if (cli.verbose) log << "simulate: N0=" << init.count << " horizon=" << horizon << '\n';
  const PathRecord rec = run_path(spec, init.sample(seed), horizon, grid_dt, seed, opt);
  out.write("path_grid.csv", grid_csv(rec));
  out.write("path_events.csv", events_csv(rec));
  out.write("path.json", path_json(rec));
  out.note("event_count", std::to_string(rec.event_count));
  out.note("terminal_N", std::to_string(rec.grid.back().n));
  out.note("bound_violations", std::to_string(rec.bound_violations));
}

void cmd_meanfield(const Config& cfg, const CliConfig& cli, Output& out, std::ostream& log) {
  const auto spec = optional_model(cfg);
  const MeanFieldLimit mf = limit_from_config(cfg, spec);
  const double m0 = cfg.get_double("ode.m0", mean(init_or(cfg, mf.birth)));
  const double horizon = cfg.get_double("ode.horizon", 25.0);
  const double dt = cfg.get_double("ode.dt", 1e-3);
  const bool s2 = is_setting2(cfg);

  out.begin({"ode.csv"});
  if (cli.verbose) log << "meanfield: setting " << (s2 ? 2 : 1) << " m0=" << m0 << '\n';
  const OdeSolution sol = s2 ? solve_setting2(mf, m0, horizon, dt) : solve_setting1(mf, m0, horizon, dt);
  out.write("ode.csv", ode_csv(sol));
  out.note("m_terminal", sol.m.back());
  if (s2) out.note("n_inf_terminal", sol.n_inf.back());
  if (sol.m_limit) out.note("m_limit", *sol.m_limit);
  if (sol.n_limit) out.note("n_inf_limit", *sol.n_limit);
  if (sol.has_closed_form()) {
    double gap = 0.0;
    for (std::size_t k = 0; k < sol.m.size(); ++k) gap = std::max(gap, std::abs(sol.m[k] - sol.m_closed[k]));
    out.note("closed_form_sup_gap", gap);
  }
  out.note("non_monotone", bool_text(non_monotone(sol.m)));
  if (!s2) {
    try {
      const double root = stationary_mean(mf, cfg.get_double("ode.bracket_lo", 1e-9), cfg.get_double("ode.bracket_hi", 1e3));
      out.note("stationary_mean", root);
    } catch (const BracketError&) {
      out.note("stationary_mean", "none");
    }
  }
}

void cmd_particles(const Config& cfg, const CliConfig& cli, Output& out, std::ostream& log) {
  const auto spec = optional_model(cfg);
  const MeanFieldLimit mf = limit_from_config(cfg, spec);
  const DistFamily init = init_or(cfg, mf.birth);
  const auto n_prime = static_cast<std::size_t>(cfg.get_int("particles.n", 500));
  const double dt = cfg.get_double("particles.dt", 1e-3);
  const double horizon = cfg.get_double("particles.horizon", 25.0);
  const auto stride = static_cast<std::size_t>(cfg.get_int("particles.mean_stride", 10));
  const auto snaps = list_or_empty(cfg, "particles.snapshot_times");
  const std::uint64_t seed = run_seed(cfg.get_u64("seed", 1), 0);

  out.begin({"particles_mean.csv", "particles_snapshots.csv"});
  if (cli.verbose) log << "particles: N'=" << n_prime << " dt=" << dt << '\n';
  ParticleRun run;
  if (is_setting2(cfg)) {
    auto r2 = run_particles_setting2(mf, n_prime, init, horizon, dt, seed, snaps);
    out.note("setting2_iterations", std::to_string(r2.iterations));
    out.note("setting2_converged", bool_text(r2.converged));
    out.note("n_inf_terminal", r2.n_inf.back());
    run = std::move(r2.run);
  } else {
    ParticleOptions opt;
    opt.snapshot_times = snaps;
    run = run_particles(mf, n_prime, init, horizon, dt, seed, opt);
  }
  out.write("particles_mean.csv", particle_mean_csv(run, stride));
  out.write("particles_snapshots.csv", snapshot_csv(run.snapshots));
  out.note("mean_terminal", run.mean.back());
  out.note("regenerations", std::to_string(run.regenerations));
  out.note("mutations", std::to_string(run.mutations));
}

void cmd_converge(const Config& cfg, const CliConfig& cli, Output& out, std::ostream& log) {
  ConvergenceParams p = convergence_params(cfg);
  p.threads = cli.threads;
  out.begin({"fan.csv", "size_ratio.csv"});
  if (cli.verbose) log << "converge: R=" << p.runs << " cells=" << p.n_list.size() << '\n';
  const auto res = convergence_experiment(p);
  out.write("fan.csv", fan_csv(res));
  out.write("size_ratio.csv", size_ratio_csv(res));
  out.note("limit_available", bool_text(res.ode.has_value()));
  out.note("limit_non_monotone", bool_text(res.limit_non_monotone));
  for (const auto& c : res.cells) {
    const std::string key = "N" + std::to_string(c.n);
    out.note(key + ".mean_terminal", c.mean.back());
    out.note(key + ".failed", bool_text(c.failed));
    for (const auto& f : c.failures) out.failure(key + " run " + std::to_string(f.run_index) + ": " + f.message);
  }
}

void cmd_capital(const Config& cfg, const CliConfig& cli, Output& out, std::ostream& log) {
  CapitalParams p = capital_params(cfg);
  p.threads = cli.threads;
  out.begin({"histogram.csv"});
  if (cli.verbose) log << "capital: D=" << p.threshold << " T=" << p.time << '\n';
  const auto res = capital_distribution_experiment(p);
  out.write("histogram.csv", histogram_csv(res));
  for (const auto& c : res.cells) {
    const std::string key = "N" + std::to_string(c.n);
    out.note(key + ".mean", c.stats.mean);
    out.note(key + ".sd", c.stats.sd);
    out.note(key + ".missing", std::to_string(c.missing));
    for (const auto& f : c.failures) out.failure(key + " run " + std::to_string(f.run_index) + ": " + f.message);
  }
}

void cmd_chaos(const Config& cfg, const CliConfig& cli, Output& out, std::ostream& log) {
  ChaosParams p = chaos_params(cfg);
  p.threads = cli.threads;
  std::vector<std::string> files;
  for (auto n : p.n_list) files.push_back("chaos_N" + std::to_string(n) + ".csv");
  out.begin(files);
  if (cli.verbose) log << "chaos: R=" << p.runs << " oracle=" << p.oracle_runs << '\n';
  const auto res = chaos_experiment(p);
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    out.write(files[i], chaos_csv(res, i));
    const auto& c = res.cells[i];
    const std::string key = "N" + std::to_string(c.n);
    out.note(key + ".surv_terminal", c.surv_finite.back());
    out.note(key + ".corr_terminal", c.corr.back());
    out.note(key + ".low_power_terminal", bool_text(c.low_power.back()));
    for (const auto& f : c.failures) out.failure(key + " run " + std::to_string(f.run_index) + ": " + f.message);
  }
  out.note("oracle_surv_terminal", res.surv_oracle.back());
}

void cmd_stability(const Config& cfg, const CliConfig& cli, Output& out, std::ostream& log) {
  const ModelSpec spec = model_from_config(cfg);
  const auto probe = StabilityProbe::standard(cfg.get_double("stability.s0", 40.0), cfg.get_int("stability.n0", 20));
  const auto state = SystemState::from_reserves(cfg.has("stability.state") ? cfg.get_double_list("stability.state")
                                                                            : std::vector<double>{1.0, 1.0});
  const bool rate_check = cfg.has("stability.lambda_star");
  std::vector<std::string> files{"lyapunov.json"};
  if (rate_check) files.push_back("rate_bound.json");
  out.begin(files);
  const auto rep = stability_report(spec, state, probe);
  const std::string text = lyapunov_json(rep);
  out.write("lyapunov.json", text);
  if (cli.verbose) log << text;
  out.note("stable_margin", rep.stable_margin);
  out.note("exp_rate_condition_ok", bool_text(rep.exp_rate_condition_ok));
  if (rate_check) {
    const double lam = cfg.get_double("stability.lambda_star");
    const double kap = cfg.get_double("stability.kappa_star");
    const double alpha = cfg.get_double("stability.alpha", 0.5 * (kap - lam));
    const auto n_max = cfg.get_int("stability.n_max", 10000);
    const auto check = verify_rate_bound([lam](std::int64_t n) { return lam * static_cast<double>(n); }, [kap](std::int64_t) { return kap; },
                                         [](std::int64_t n) { return static_cast<double>(n + 1); }, alpha, n_max);
    std::string json = "{\n  \"alpha\": " + format_real(alpha) + ",\n  \"n_max\": " + std::to_string(n_max) +
                       ",\n  \"ok\": " + bool_text(check.ok) + ",\n  \"first_violation\": " +
                       (check.first_violation ? std::to_string(*check.first_violation) : std::string("null")) + "\n}\n";
    out.write("rate_bound.json", json);
    out.note("rate_bound_ok", bool_text(check.ok));
  }
}

using Command = std::function<void(const Config&, const CliConfig&, Output&, std::ostream&)>;

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation of banking systems with defaults, contagion and births"};
  app.require_subcommand(1);
  CliConfig cli;
  const char* env_out = std::getenv("BANKSIM_OUT");
  cli.out_dir = env_out && *env_out ? env_out : "results";

  const std::vector<std::pair<std::string, std::string>> commands{
      {"simulate", "one path of the finite system"},
      {"meanfield", "solve the limiting mean equations"},
      {"particles", "interacting particle approximation of the limit"},
      {"converge", "convergence fans of m_N(t) across N"},
      {"capital", "distribution of the fraction of banks below a threshold"},
      {"chaos", "tagged-bank survival and dependence across N"},
      {"stability", "Lyapunov drift report"},
  };
  std::optional<std::uint64_t> seed;
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", cli.config_path, "configuration file (.conf or manifest .json)")->required();
    sub->add_option("--out", cli.out_dir, "output directory (default $BANKSIM_OUT or ./results)");
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--threads", cli.threads, "worker threads, 0 = all logical cores");
    sub->add_flag("--verbose", cli.verbose, "progress on stderr");
    sub->callback([&cli, name = name] { cli.subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  }
  cli.seed = seed;

  static const std::map<std::string, Command> table{
      {"simulate", cmd_simulate}, {"meanfield", cmd_meanfield}, {"particles", cmd_particles},
      {"converge", cmd_converge}, {"capital", cmd_capital},     {"chaos", cmd_chaos},
      {"stability", cmd_stability},
  };

  try {
    Config cfg = Config::load(cli.config_path);
    if (cli.seed) cfg.set_u64("seed", *cli.seed);
    if (!cfg.has("seed")) cfg.set_u64("seed", 1);
    ExperimentManifest manifest;
    manifest.kind = cli.subcommand;
    manifest.config = cfg;
    Output output(cli.out_dir, manifest);
    table.at(cli.subcommand)(cfg, cli, output, err);
    output.flush();
    if (cli.verbose) err << "wrote " << cli.out_dir << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) { return run_cli(argc, argv, std::cout, std::cerr); }

}  // namespace banksim
