#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "banksim/limit.hpp"
#include "banksim/model.hpp"

namespace banksim {

/// Flat `key = value` configuration. Lines starting with '#' are comments.
/// Keys are dotted paths (model.r, model.birth_rate.form, ...); see
/// docs/config.md for the full schema.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text, const std::string& origin = "<string>");
  /// Loads a .conf file, or the embedded configuration of a run manifest
  /// (.json). Throws ConfigError if the file is missing or malformed.
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::int64_t> get_int_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void set(const std::string& key, double value);
  void set(const std::string& key, std::int64_t value);
  void set_u64(const std::string& key, std::uint64_t value);
  void erase_prefix(const std::string& prefix);

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  /// Canonical text form: sorted `key = value` lines.
  std::string to_text() const;

  bool operator==(const Config&) const = default;

 private:
  std::map<std::string, std::string> entries_;
};

/// Shortest-round-trip is not guaranteed by iostreams; this always emits 17
/// significant digits.
std::string format_real(double v);

DistFamily dist_from_config(const Config& cfg, const std::string& prefix);
void write_dist(Config& cfg, const std::string& prefix, const DistFamily& dist);

ModelSpec model_from_config(const Config& cfg);
void write_model(Config& cfg, const ModelSpec& spec);

/// Reads limit.* keys when present; otherwise derives the limit from `spec`.
MeanFieldLimit limit_from_config(const Config& cfg, const std::optional<ModelSpec>& spec);
void write_limit(Config& cfg, const MeanFieldLimit& mf);

}  // namespace banksim
