#pragma once

#include <variant>

#include "banksim/model.hpp"

namespace banksim {

/// lambda_inf(y) = c
struct LimitConstantRate {
  double c = 0.0;
  bool operator==(const LimitConstantRate&) const = default;
};
/// lambda_inf(y) = c * y
struct LimitLinearInMean {
  double c = 0.0;
  bool operator==(const LimitLinearInMean&) const = default;
};
using LimitBirthRate = std::variant<LimitConstantRate, LimitLinearInMean>;

/// kappa_inf(y, x) = c
struct LimitConstantKill {
  double c = 0.0;
  bool operator==(const LimitConstantKill&) const = default;
};
/// kappa_inf(y, x) = a / (b + x)
struct LimitHyperbolicKill {
  double a = 1.0;
  double b = 1.0;
  bool operator==(const LimitHyperbolicKill&) const = default;
};
using LimitKillRate = std::variant<LimitConstantKill, LimitHyperbolicKill>;

/// Limiting coefficients of the mean-field dynamics: birth intensity,
/// killing intensity (clamped at kappa_cap), birth law B_inf and the mean
/// scaled contagion impact Dbar_inf (x- and y-independent here).
struct MeanFieldLimit {
  double r = 0.0;
  double sigma = 0.2;
  LimitBirthRate lambda = LimitConstantRate{};
  LimitKillRate kappa = LimitConstantKill{};
  double kappa_cap = 10.0;
  DistFamily birth = Exponential{1.0};
  double dbar = 0.5;

  double lambda_at(double y) const;
  double kappa_at(double y, double x) const;
  double birth_mean() const { return mean(birth); }
  /// r - Dbar * kbar, kbar being the population mean of kappa
  double psi(double kappa_mean) const { return r - dbar * kappa_mean; }
  /// Upper bound of kappa over all (y, x).
  double kappa_bound() const;
  bool kappa_x_independent() const;
  /// True when lambda, kappa, Bbar and Dbar are all constants.
  bool all_constant() const;

  void validate() const;
  bool operator==(const MeanFieldLimit&) const = default;
};

/// Limiting coefficients implied by a finite-system spec under its own
/// scaling. Throws ConfigError for families without a finite limit.
MeanFieldLimit derive_limit(const ModelSpec& spec);

}  // namespace banksim
