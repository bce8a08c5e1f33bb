#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "banksim/rng.hpp"

namespace banksim {

// ---------------------------------------------------------------------------
// Scaling regimes
// ---------------------------------------------------------------------------

/// Rates and contagion scale with the current number of banks.
struct Setting1 {
  bool operator==(const Setting1&) const = default;
};

/// Rates and contagion scale with the initial number of banks `n0`.
struct Setting2 {
  std::int64_t n0 = 1;
  bool operator==(const Setting2&) const = default;
};

using Scaling = std::variant<Setting1, Setting2>;

// ---------------------------------------------------------------------------
// Birth intensity lambda_n(s)
// ---------------------------------------------------------------------------

struct ConstantRate {
  double c = 0.0;
  bool operator==(const ConstantRate&) const = default;
};
/// c * n
struct LinearInCount {
  double c = 0.0;
  bool operator==(const LinearInCount&) const = default;
};
/// c * s
struct LinearInTotal {
  double c = 0.0;
  bool operator==(const LinearInTotal&) const = default;
};
/// c * N0 (setting 2 only)
struct LinearInInitialCount {
  double c = 0.0;
  bool operator==(const LinearInInitialCount&) const = default;
};

using RateFamily = std::variant<ConstantRate, LinearInCount, LinearInTotal, LinearInInitialCount>;

/// Coefficients (a, b, c) with lambda_n(s) <= a + b*n + c*s everywhere.
struct AffineBound {
  double constant = 0.0;
  double per_bank = 0.0;
  double per_reserve = 0.0;
};

// ---------------------------------------------------------------------------
// Default intensity kappa_n(s, x), clamped to [0, cap]
// ---------------------------------------------------------------------------

struct ConstantDefault {
  double c = 0.0;
  bool operator==(const ConstantDefault&) const = default;
};
/// a * n / (b + x) when scale_by_n, else a / (b + x)
struct HyperbolicDefault {
  double a = 1.0;
  double b = 1.0;
  bool scale_by_n = false;
  bool operator==(const HyperbolicDefault&) const = default;
};

struct DefaultRateFamily {
  std::variant<ConstantDefault, HyperbolicDefault> form = ConstantDefault{};
  double cap = 10.0;
  bool operator==(const DefaultRateFamily&) const = default;
};

// ---------------------------------------------------------------------------
// Distributions on (0, inf) and on (0, 1)
// ---------------------------------------------------------------------------

struct Exponential {
  double rate = 1.0;
  bool operator==(const Exponential&) const = default;
};
/// exp(N(mu, s^2))
struct LogNormal {
  double mu = 0.0;
  double s = 1.0;
  bool operator==(const LogNormal&) const = default;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
  bool operator==(const Uniform&) const = default;
};
struct Dirac {
  double v = 1.0;
  bool operator==(const Dirac&) const = default;
};

using DistFamily = std::variant<Exponential, LogNormal, Uniform, Dirac>;

double sample(const DistFamily& dist, RngStream& rng);
double mean(const DistFamily& dist);
/// E[X^p] for p > 0.
double moment(const DistFamily& dist, double p);
/// Inverse CDF on (0, 1).
double quantile(const DistFamily& dist, double u);
/// E[f(X)]; exact for Dirac, adaptive Gauss-Legendre on the quantile scale
/// otherwise.
double expectation(const DistFamily& dist, const std::function<double(double)>& f);
void validate_positive_support(const DistFamily& dist, const std::string& what);

// ---------------------------------------------------------------------------
// Contagion (default impact) laws on (0, 1)
// ---------------------------------------------------------------------------

/// Uniform(0, d / n) with n the current count.
struct UniformOverCount {
  double d = 1.0;
  bool operator==(const UniformOverCount&) const = default;
};
/// Uniform(0, d / N0).
struct UniformOverInitial {
  double d = 1.0;
  bool operator==(const UniformOverInitial&) const = default;
};
/// Point mass at v in (0, 1).
struct ConstantImpact {
  double v = 0.5;
  bool operator==(const ConstantImpact&) const = default;
};

using ContagionFamily = std::variant<UniformOverCount, UniformOverInitial, ConstantImpact>;

// ---------------------------------------------------------------------------
// Full parameterization of a finite system
// ---------------------------------------------------------------------------

struct ModelSpec {
  double r = 0.0;
  double sigma = 0.2;
  RateFamily birth_rate = ConstantRate{1.0};
  DefaultRateFamily default_rate{};
  DistFamily birth_size = Exponential{1.0};
  /// Law of the first bank emerging from the empty state; defaults to birth_size.
  std::optional<DistFamily> birth_size_empty;
  ContagionFamily contagion = UniformOverCount{1.0};
  Scaling scaling = Setting1{};

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
  bool operator==(const ModelSpec&) const = default;
};

struct Rates {
  double lambda = 0.0;
  double kappa = 0.0;
};

double birth_rate(const ModelSpec& spec, std::int64_t n, double s);
double default_rate(const ModelSpec& spec, std::int64_t n, double s, double x);
/// Birth intensity and per-bank default intensity at (n, s, x). For n = 0 the
/// kappa component is 0 and x is ignored.
Rates eval_rates(const ModelSpec& spec, std::int64_t n, double s, double x);

/// Upper bound of kappa valid for every reserve level at count n.
double default_rate_bound(const ModelSpec& spec, std::int64_t n, double s);
AffineBound birth_rate_bound(const ModelSpec& spec);
/// True when kappa does not depend on the individual reserve x.
bool default_rate_x_independent(const ModelSpec& spec);

/// Impact law at count n (n >= 1), as a distribution on (0, 1).
DistFamily contagion_law(const ModelSpec& spec, std::int64_t n);
/// Draws one contagion fraction, strictly inside (0, 1).
double sample_contagion(const ModelSpec& spec, std::int64_t n, RngStream& rng);
/// Law of a newborn bank when the system currently holds n banks.
const DistFamily& birth_law(const ModelSpec& spec, std::int64_t n);

std::int64_t initial_count(const Scaling& scaling);  // N0 or 0 for setting 1

}  // namespace banksim
