#include "banksim/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "banksim/error.hpp"
#include "banksim/overloaded.hpp"

namespace banksim {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, std::string_view text) {
  double value = 0.0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError("key '" + key + "': expected a real number, got '" + std::string(text) + "'");
  return value;
}

std::int64_t parse_int(const std::string& key, std::string_view text) {
  std::int64_t value = 0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + std::string(text) + "'");
  return value;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    const auto item = trim(text.substr(start, end - start));
    if (!item.empty()) parts.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

[[noreturn]] void unknown_form(const std::string& key, const std::string& value) {
  throw ConfigError("key '" + key + "': unknown form '" + value + "'");
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

Config Config::parse(std::string_view text, const std::string& origin) {
  Config cfg;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (const auto hash = value.find(" #"); hash != std::string_view::npos) value = trim(value.substr(0, hash));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    cfg.entries_[std::string(key)] = std::string(value);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  if (path.extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("manifest '" + path.string() + "': " + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object())
      throw ConfigError("manifest '" + path.string() + "' has no 'config' object");
    Config cfg;
    for (const auto& [key, value] : doc["config"].items()) {
      if (!value.is_string()) throw ConfigError("manifest config values must be strings");
      cfg.entries_[key] = value.get<std::string>();
    }
    return cfg;
  }
  return parse(text, path.string());
}

const std::string& Config::get_string(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const { return parse_double(key, get_string(key)); }

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key) const { return parse_int(key, get_string(key)); }

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const auto t = trim(get_string(key));
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError("key '" + key + "': expected an unsigned 64-bit integer");
  return value;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (auto item : split_list(get_string(key))) out.push_back(parse_double(key, item));
  return out;
}

std::vector<std::int64_t> Config::get_int_list(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (auto item : split_list(get_string(key))) out.push_back(parse_int(key, item));
  return out;
}

void Config::set(const std::string& key, double value) { entries_[key] = format_real(value); }
void Config::set(const std::string& key, std::int64_t value) { entries_[key] = std::to_string(value); }
void Config::set_u64(const std::string& key, std::uint64_t value) { entries_[key] = std::to_string(value); }

void Config::erase_prefix(const std::string& prefix) {
  for (auto it = entries_.lower_bound(prefix); it != entries_.end() && it->first.starts_with(prefix);)
    it = entries_.erase(it);
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& [key, value] : entries_) out += key + " = " + value + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

DistFamily dist_from_config(const Config& cfg, const std::string& prefix) {
  const auto key = prefix + ".form";
  const auto& form = cfg.get_string(key);
  if (form == "exponential") return Exponential{cfg.get_double(prefix + ".rate")};
  if (form == "lognormal") return LogNormal{cfg.get_double(prefix + ".mu"), cfg.get_double(prefix + ".s")};
  if (form == "uniform") return Uniform{cfg.get_double(prefix + ".lo"), cfg.get_double(prefix + ".hi")};
  if (form == "dirac") return Dirac{cfg.get_double(prefix + ".v")};
  unknown_form(key, form);
}

void write_dist(Config& cfg, const std::string& prefix, const DistFamily& dist) {
  cfg.erase_prefix(prefix + ".");
  std::visit(Overloaded{
                 [&](const Exponential& d) {
                   cfg.set(prefix + ".form", "exponential");
                   cfg.set(prefix + ".rate", d.rate);
                 },
                 [&](const LogNormal& d) {
                   cfg.set(prefix + ".form", "lognormal");
                   cfg.set(prefix + ".mu", d.mu);
                   cfg.set(prefix + ".s", d.s);
                 },
                 [&](const Uniform& d) {
                   cfg.set(prefix + ".form", "uniform");
                   cfg.set(prefix + ".lo", d.lo);
                   cfg.set(prefix + ".hi", d.hi);
                 },
                 [&](const Dirac& d) {
                   cfg.set(prefix + ".form", "dirac");
                   cfg.set(prefix + ".v", d.v);
                 },
             },
             dist);
}

ModelSpec model_from_config(const Config& cfg) {
  ModelSpec spec;
  spec.r = cfg.get_double("model.r");
  spec.sigma = cfg.get_double("model.sigma");

  const auto& scaling = cfg.get_string("model.scaling", "setting1");
  if (scaling == "setting1") {
    spec.scaling = Setting1{};
  } else if (scaling == "setting2") {
    spec.scaling = Setting2{cfg.get_int("model.n0")};
  } else {
    unknown_form("model.scaling", scaling);
  }

  const auto& birth = cfg.get_string("model.birth_rate.form");
  const double bc = cfg.get_double("model.birth_rate.c");
  if (birth == "constant") spec.birth_rate = ConstantRate{bc};
  else if (birth == "linear_n") spec.birth_rate = LinearInCount{bc};
  else if (birth == "linear_s") spec.birth_rate = LinearInTotal{bc};
  else if (birth == "linear_n0") spec.birth_rate = LinearInInitialCount{bc};
  else unknown_form("model.birth_rate.form", birth);

  const auto& def = cfg.get_string("model.default_rate.form");
  if (def == "constant") {
    spec.default_rate.form = ConstantDefault{cfg.get_double("model.default_rate.c")};
  } else if (def == "hyperbolic") {
    spec.default_rate.form = HyperbolicDefault{cfg.get_double("model.default_rate.a"),
                                               cfg.get_double("model.default_rate.b"),
                                               cfg.get_bool("model.default_rate.scale_by_n", false)};
  } else {
    unknown_form("model.default_rate.form", def);
  }
  spec.default_rate.cap = cfg.get_double("model.default_rate.cap", 10.0);

  spec.birth_size = dist_from_config(cfg, "model.birth_size");
  if (cfg.has("model.birth_size_empty.form"))
    spec.birth_size_empty = dist_from_config(cfg, "model.birth_size_empty");

  const auto& cont = cfg.get_string("model.contagion.form");
  if (cont == "uniform_over_count") spec.contagion = UniformOverCount{cfg.get_double("model.contagion.d")};
  else if (cont == "uniform_over_n0") spec.contagion = UniformOverInitial{cfg.get_double("model.contagion.d")};
  else if (cont == "constant") spec.contagion = ConstantImpact{cfg.get_double("model.contagion.v")};
  else unknown_form("model.contagion.form", cont);

  spec.validate();
  return spec;
}

void write_model(Config& cfg, const ModelSpec& spec) {
  cfg.erase_prefix("model.");
  cfg.set("model.r", spec.r);
  cfg.set("model.sigma", spec.sigma);
  std::visit(Overloaded{
                 [&](const Setting1&) { cfg.set("model.scaling", "setting1"); },
                 [&](const Setting2& s) {
                   cfg.set("model.scaling", "setting2");
                   cfg.set("model.n0", s.n0);
                 },
             },
             spec.scaling);
  std::visit(Overloaded{
                 [&](const ConstantRate& f) { cfg.set("model.birth_rate.form", "constant"); cfg.set("model.birth_rate.c", f.c); },
                 [&](const LinearInCount& f) { cfg.set("model.birth_rate.form", "linear_n"); cfg.set("model.birth_rate.c", f.c); },
                 [&](const LinearInTotal& f) { cfg.set("model.birth_rate.form", "linear_s"); cfg.set("model.birth_rate.c", f.c); },
                 [&](const LinearInInitialCount& f) { cfg.set("model.birth_rate.form", "linear_n0"); cfg.set("model.birth_rate.c", f.c); },
             },
             spec.birth_rate);
  std::visit(Overloaded{
                 [&](const ConstantDefault& f) {
                   cfg.set("model.default_rate.form", "constant");
                   cfg.set("model.default_rate.c", f.c);
                 },
                 [&](const HyperbolicDefault& f) {
                   cfg.set("model.default_rate.form", "hyperbolic");
                   cfg.set("model.default_rate.a", f.a);
                   cfg.set("model.default_rate.b", f.b);
                   cfg.set("model.default_rate.scale_by_n", f.scale_by_n ? "true" : "false");
                 },
             },
             spec.default_rate.form);
  cfg.set("model.default_rate.cap", spec.default_rate.cap);
  write_dist(cfg, "model.birth_size", spec.birth_size);
  if (spec.birth_size_empty) write_dist(cfg, "model.birth_size_empty", *spec.birth_size_empty);
  std::visit(Overloaded{
                 [&](const UniformOverCount& c) { cfg.set("model.contagion.form", "uniform_over_count"); cfg.set("model.contagion.d", c.d); },
                 [&](const UniformOverInitial& c) { cfg.set("model.contagion.form", "uniform_over_n0"); cfg.set("model.contagion.d", c.d); },
                 [&](const ConstantImpact& c) { cfg.set("model.contagion.form", "constant"); cfg.set("model.contagion.v", c.v); },
             },
             spec.contagion);
}

MeanFieldLimit limit_from_config(const Config& cfg, const std::optional<ModelSpec>& spec) {
  const bool explicit_limit = cfg.has("limit.lambda.form") || cfg.has("limit.kappa.form");
  MeanFieldLimit mf;
  if (!explicit_limit) {
    if (!spec) throw ConfigError("no limit.* keys and no model.* keys to derive the limit from");
    mf = derive_limit(*spec);
  } else {
    mf.r = cfg.has("limit.r") ? cfg.get_double("limit.r") : cfg.get_double("model.r");
    mf.sigma = cfg.has("limit.sigma") ? cfg.get_double("limit.sigma") : cfg.get_double("model.sigma");
    const auto& lam = cfg.get_string("limit.lambda.form");
    if (lam == "constant") mf.lambda = LimitConstantRate{cfg.get_double("limit.lambda.c")};
    else if (lam == "linear_mean") mf.lambda = LimitLinearInMean{cfg.get_double("limit.lambda.c")};
    else unknown_form("limit.lambda.form", lam);
    const auto& kap = cfg.get_string("limit.kappa.form");
    if (kap == "constant") mf.kappa = LimitConstantKill{cfg.get_double("limit.kappa.c")};
    else if (kap == "hyperbolic") mf.kappa = LimitHyperbolicKill{cfg.get_double("limit.kappa.a"), cfg.get_double("limit.kappa.b")};
    else unknown_form("limit.kappa.form", kap);
    mf.kappa_cap = cfg.get_double("limit.kappa.cap", 10.0);
    mf.birth = dist_from_config(cfg, "limit.birth_size");
    mf.dbar = cfg.get_double("limit.dbar");
  }
  mf.validate();
  return mf;
}

void write_limit(Config& cfg, const MeanFieldLimit& mf) {
  cfg.erase_prefix("limit.");
  cfg.set("limit.r", mf.r);
  cfg.set("limit.sigma", mf.sigma);
  std::visit(Overloaded{
                 [&](const LimitConstantRate& f) { cfg.set("limit.lambda.form", "constant"); cfg.set("limit.lambda.c", f.c); },
                 [&](const LimitLinearInMean& f) { cfg.set("limit.lambda.form", "linear_mean"); cfg.set("limit.lambda.c", f.c); },
             },
             mf.lambda);
  std::visit(Overloaded{
                 [&](const LimitConstantKill& f) { cfg.set("limit.kappa.form", "constant"); cfg.set("limit.kappa.c", f.c); },
                 [&](const LimitHyperbolicKill& f) {
                   cfg.set("limit.kappa.form", "hyperbolic");
                   cfg.set("limit.kappa.a", f.a);
                   cfg.set("limit.kappa.b", f.b);
                 },
             },
             mf.kappa);
  cfg.set("limit.kappa.cap", mf.kappa_cap);
  write_dist(cfg, "limit.birth_size", mf.birth);
  cfg.set("limit.dbar", mf.dbar);
}

}  // namespace banksim
