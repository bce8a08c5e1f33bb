#include "banksim/limit.hpp"

#include <algorithm>
#include <cmath>

#include "banksim/error.hpp"
#include "banksim/overloaded.hpp"

namespace banksim {

double MeanFieldLimit::lambda_at(double y) const {
  return std::visit(Overloaded{
                        [](const LimitConstantRate& f) { return f.c; },
                        [y](const LimitLinearInMean& f) { return f.c * y; },
                    },
                    lambda);
}

double MeanFieldLimit::kappa_at(double /*y*/, double x) const {
  const double raw = std::visit(Overloaded{
                                    [](const LimitConstantKill& f) { return f.c; },
                                    [x](const LimitHyperbolicKill& f) { return f.a / (f.b + x); },
                                },
                                kappa);
  return std::clamp(raw, 0.0, kappa_cap);
}

double MeanFieldLimit::kappa_bound() const {
  return std::visit(Overloaded{
                        [&](const LimitConstantKill& f) { return std::min(f.c, kappa_cap); },
                        [&](const LimitHyperbolicKill& f) { return std::min(f.a / f.b, kappa_cap); },
                    },
                    kappa);
}

bool MeanFieldLimit::kappa_x_independent() const {
  return std::holds_alternative<LimitConstantKill>(kappa);
}

bool MeanFieldLimit::all_constant() const {
  return std::holds_alternative<LimitConstantRate>(lambda) && kappa_x_independent();
}

void MeanFieldLimit::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(std::isfinite(r) && r >= 0.0, "limit r must be >= 0");
  require(std::isfinite(sigma) && sigma > 0.0, "limit sigma must be > 0");
  std::visit([&](const auto& f) { require(std::isfinite(f.c) && f.c >= 0.0, "limit.lambda.c must be >= 0"); },
             lambda);
  std::visit(Overloaded{
                 [&](const LimitConstantKill& f) {
                   require(std::isfinite(f.c) && f.c >= 0.0, "limit.kappa.c must be >= 0");
                 },
                 [&](const LimitHyperbolicKill& f) {
                   require(f.a > 0.0 && f.b > 0.0, "limit.kappa hyperbolic needs a, b > 0");
                 },
             },
             kappa);
  require(kappa_cap > 0.0, "limit.kappa.cap must be > 0");
  require(std::isfinite(dbar) && dbar >= 0.0, "limit.dbar must be >= 0");
  validate_positive_support(birth, "limit.birth_size");
}

MeanFieldLimit derive_limit(const ModelSpec& spec) {
  MeanFieldLimit mf;
  mf.r = spec.r;
  mf.sigma = spec.sigma;
  mf.kappa_cap = spec.default_rate.cap;
  mf.birth = spec.birth_size;
  const bool setting2 = std::holds_alternative<Setting2>(spec.scaling);

  // lambda_n(n y) / n (setting 1) or lambda_N / N (setting 2).
  mf.lambda = std::visit(
      Overloaded{
          [](const ConstantRate&) -> LimitBirthRate { return LimitConstantRate{0.0}; },
          [&](const LinearInCount& f) -> LimitBirthRate {
            if (setting2) throw ConfigError("birth rate linear_n has no setting-2 limit");
            return LimitConstantRate{f.c};
          },
          [&](const LinearInTotal& f) -> LimitBirthRate {
            if (setting2) throw ConfigError("birth rate linear_s has no setting-2 limit");
            return LimitLinearInMean{f.c};
          },
          [](const LinearInInitialCount& f) -> LimitBirthRate { return LimitConstantRate{f.c}; },
      },
      spec.birth_rate);

  mf.kappa = std::visit(
      Overloaded{
          [](const ConstantDefault& f) -> LimitKillRate { return LimitConstantKill{f.c}; },
          [](const HyperbolicDefault& f) -> LimitKillRate {
            if (f.scale_by_n) throw ConfigError("count-scaled hyperbolic default rate has no finite limit");
            return LimitHyperbolicKill{f.a, f.b};
          },
      },
      spec.default_rate.form);

  // n * xi converges to Uniform(0, d), whose mean is d / 2.
  mf.dbar = std::visit(Overloaded{
                           [&](const UniformOverCount& c) {
                             if (setting2) throw ConfigError("uniform_over_count contagion has no setting-2 limit");
                             return 0.5 * c.d;
                           },
                           [](const UniformOverInitial& c) { return 0.5 * c.d; },
                           [](const ConstantImpact&) -> double {
                             throw ConfigError("constant contagion impact has no finite mean-field limit");
                           },
                       },
                       spec.contagion);
  return mf;
}

}  // namespace banksim
