#include "banksim/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "banksim/config.hpp"
#include "banksim/error.hpp"
#include "banksim/overloaded.hpp"

namespace banksim {

using nlohmann::json;

std::string csv_real(double v) { return std::isnan(v) ? std::string("NA") : format_real(v); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string grid_csv(const PathRecord& rec) {
  std::string out = "t,N,S,m\n";
  for (const auto& g : rec.grid)
    out += csv_real(g.t) + ',' + std::to_string(g.n) + ',' + csv_real(g.s) + ',' + csv_real(g.m) + '\n';
  return out;
}

std::string events_csv(const PathRecord& rec) {
  std::string out = "t,kind,id,reserve\n";
  for (const auto& ev : rec.events) {
    std::visit(Overloaded{
                   [&](const BirthEvent& b) {
                     out += csv_real(ev.time) + ",birth," + std::to_string(b.id) + ',' + csv_real(b.reserve) + '\n';
                   },
                   [&](const DefaultEvent& d) {
                     out += csv_real(ev.time) + ",default," + std::to_string(d.id) + ',' + csv_real(d.reserve) + '\n';
                   },
               },
               ev.kind);
  }
  return out;
}

namespace {

json real_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

}  // namespace

std::string path_json(const PathRecord& rec) {
  json doc;
  doc["seed"] = rec.seed;
  doc["run_index"] = rec.run_index;
  doc["event_count"] = rec.event_count;
  doc["bound_violations"] = rec.bound_violations;
  json grid = json::array();
  for (const auto& g : rec.grid) grid.push_back({{"t", g.t}, {"N", g.n}, {"S", g.s}, {"m", real_or_null(g.m)}});
  doc["grid"] = std::move(grid);
  json events = json::array();
  for (const auto& ev : rec.events) {
    std::visit(Overloaded{
                   [&](const BirthEvent& b) {
                     events.push_back({{"t", ev.time}, {"kind", "birth"}, {"id", b.id}, {"reserve", b.reserve}});
                   },
                   [&](const DefaultEvent& d) {
                     events.push_back({{"t", ev.time},
                                       {"kind", "default"},
                                       {"id", d.id},
                                       {"reserve", d.reserve},
                                       {"impacts", d.impacts}});
                   },
               },
               ev.kind);
  }
  doc["events"] = std::move(events);
  json snaps = json::array();
  for (const auto& [t, m] : rec.snapshots)
    snaps.push_back({{"t", t}, {"reserves", std::vector<double>(m.samples().begin(), m.samples().end())}});
  doc["snapshots"] = std::move(snaps);
  json tracked = json::array();
  for (const auto& tb : rec.tracked) {
    json values = json::array();
    for (double v : tb.reserve) values.push_back(real_or_null(v));
    tracked.push_back({{"id", tb.id}, {"reserve", std::move(values)}});
  }
  doc["tracked"] = std::move(tracked);
  return doc.dump(1) + '\n';
}

std::string ode_csv(const OdeSolution& sol) {
  std::string out = sol.setting == 2 ? "t,m_tilde,N_inf\n" : "t,m\n";
  for (std::size_t k = 0; k < sol.t.size(); ++k) {
    out += csv_real(sol.t[k]) + ',' + csv_real(sol.m[k]);
    if (sol.setting == 2) out += ',' + csv_real(sol.n_inf[k]);
    out += '\n';
  }
  return out;
}

std::string snapshot_csv(const std::vector<std::pair<double, EmpiricalMeasure>>& snaps) {
  std::string out = "t,particle_index,reserve\n";
  for (const auto& [t, m] : snaps) {
    const auto xs = m.samples();
    for (std::size_t i = 0; i < xs.size(); ++i) out += csv_real(t) + ',' + std::to_string(i) + ',' + csv_real(xs[i]) + '\n';
  }
  return out;
}

std::string particle_mean_csv(const ParticleRun& run, std::size_t stride) {
  if (stride == 0) stride = 1;
  std::string out = "t,mean\n";
  for (std::size_t k = 0; k < run.t.size(); k += stride) out += csv_real(run.t[k]) + ',' + csv_real(run.mean[k]) + '\n';
  return out;
}

std::string survival_csv(const SurvivalCurve& curve, std::size_t stride) {
  if (stride == 0) stride = 1;
  std::string out = "t,survival_prob,se\n";
  for (std::size_t k = 0; k < curve.t.size(); k += stride)
    out += csv_real(curve.t[k]) + ',' + csv_real(curve.survival[k]) + ',' + csv_real(curve.se[k]) + '\n';
  return out;
}

std::string lyapunov_json(const LyapunovReport& rep) {
  json doc{{"phi_value", rep.phi_value},
           {"conservative_bound_ok", rep.conservative_bound_ok},
           {"c1", rep.c1},
           {"c2", rep.c2},
           {"c3", rep.c3},
           {"stable_margin", rep.stable_margin},
           {"exp_rate_sup", rep.exp_rate_sup},
           {"exp_rate_condition_ok", rep.exp_rate_condition_ok},
           {"probes", rep.probes}};
  return doc.dump(2) + '\n';
}

}  // namespace banksim
