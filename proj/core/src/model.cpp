#include "banksim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>

#include "banksim/error.hpp"
#include "banksim/overloaded.hpp"
#include "banksim/quadrature.hpp"

namespace banksim {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }
bool finite_pos(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

double sample(const DistFamily& dist, RngStream& rng) {
  return std::visit(
      Overloaded{
          [&](const Exponential& d) { return rng.exponential(d.rate); },
          [&](const LogNormal& d) { return std::exp(d.mu + d.s * rng.normal()); },
          [&](const Uniform& d) { return d.lo + (d.hi - d.lo) * rng.uniform(); },
          [](const Dirac& d) { return d.v; },
      },
      dist);
}

double mean(const DistFamily& dist) { return moment(dist, 1.0); }

double moment(const DistFamily& dist, double p) {
  if (!(p > 0.0)) throw DomainError("moment order must be positive");
  return std::visit(
      Overloaded{
          [p](const Exponential& d) { return std::tgamma(p + 1.0) / std::pow(d.rate, p); },
          [p](const LogNormal& d) { return std::exp(p * d.mu + 0.5 * p * p * d.s * d.s); },
          [p](const Uniform& d) {
            if (d.hi == d.lo) return std::pow(d.lo, p);
            return (std::pow(d.hi, p + 1.0) - std::pow(d.lo, p + 1.0)) /
                   ((p + 1.0) * (d.hi - d.lo));
          },
          [p](const Dirac& d) { return std::pow(d.v, p); },
      },
      dist);
}

double quantile(const DistFamily& dist, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  return std::visit(
      Overloaded{
          [u](const Exponential& d) { return -std::log1p(-u) / d.rate; },
          [u](const LogNormal& d) {
            return std::exp(boost::math::quantile(boost::math::normal(d.mu, d.s), u));
          },
          [u](const Uniform& d) { return d.lo + (d.hi - d.lo) * u; },
          [](const Dirac& d) { return d.v; },
      },
      dist);
}

double expectation(const DistFamily& dist, const std::function<double(double)>& f) {
  return std::visit(
      Overloaded{
          [&](const Dirac& d) { return f(d.v); },
          [&](const Uniform& d) {
            if (d.hi == d.lo) return f(d.lo);
            return integrate_adaptive(f, d.lo, d.hi) / (d.hi - d.lo);
          },
          [&](const auto&) {
            return integrate_adaptive([&](double u) { return f(quantile(dist, u)); }, 0.0, 1.0);
          },
      },
      dist);
}

void validate_positive_support(const DistFamily& dist, const std::string& what) {
  std::visit(Overloaded{
                 [&](const Exponential& d) { require(finite_pos(d.rate), what + ": rate must be > 0"); },
                 [&](const LogNormal& d) {
                   require(std::isfinite(d.mu), what + ": mu must be finite");
                   require(finite_pos(d.s), what + ": s must be > 0");
                 },
                 [&](const Uniform& d) {
                   require(finite_nonneg(d.lo) && std::isfinite(d.hi) && d.hi > d.lo,
                           what + ": need 0 <= lo < hi");
                 },
                 [&](const Dirac& d) { require(finite_pos(d.v), what + ": point mass must be > 0"); },
             },
             dist);
}

// ---------------------------------------------------------------------------
// ModelSpec
// ---------------------------------------------------------------------------

std::int64_t initial_count(const Scaling& scaling) {
  if (const auto* s2 = std::get_if<Setting2>(&scaling)) return s2->n0;
  return 0;
}

void ModelSpec::validate() const {
  require(finite_nonneg(r), "model.r must be >= 0");
  require(finite_pos(sigma), "model.sigma must be > 0");
  const bool setting2 = std::holds_alternative<Setting2>(scaling);
  if (setting2) require(std::get<Setting2>(scaling).n0 >= 1, "model.n0 must be >= 1");

  std::visit([&](const auto& f) { require(finite_nonneg(f.c), "birth rate coefficient must be >= 0"); },
             birth_rate);
  if (std::holds_alternative<LinearInInitialCount>(birth_rate))
    require(setting2, "birth rate linear_n0 requires model.scaling = setting2");

  require(finite_pos(default_rate.cap), "model.default_rate.cap must be > 0");
  std::visit(Overloaded{
                 [](const ConstantDefault& f) { require(finite_nonneg(f.c), "default rate must be >= 0"); },
                 [](const HyperbolicDefault& f) {
                   require(finite_pos(f.a) && finite_pos(f.b), "hyperbolic default rate needs a, b > 0");
                 },
             },
             default_rate.form);

  validate_positive_support(birth_size, "model.birth_size");
  if (const auto* u = std::get_if<Uniform>(&birth_size))
    require(u->lo > 0.0 || u->hi > 0.0, "model.birth_size uniform must have positive mass");
  if (birth_size_empty) validate_positive_support(*birth_size_empty, "model.birth_size_empty");

  std::visit(Overloaded{
                 [](const UniformOverCount& c) {
                   require(c.d > 0.0 && c.d <= 1.0, "contagion d must lie in (0, 1]");
                 },
                 [&](const UniformOverInitial& c) {
                   require(setting2, "contagion uniform_over_n0 requires model.scaling = setting2");
                   require(c.d > 0.0 && c.d <= 1.0, "contagion d must lie in (0, 1]");
                 },
                 [](const ConstantImpact& c) {
                   require(c.v > 0.0 && c.v < 1.0, "contagion point mass must lie in (0, 1)");
                 },
             },
             contagion);
}

double birth_rate(const ModelSpec& spec, std::int64_t n, double s) {
  if (n < 0 || !(s >= 0.0)) throw DomainError("birth rate needs n >= 0 and s >= 0");
  const double count = static_cast<double>(n);
  return std::visit(Overloaded{
                        [](const ConstantRate& f) { return f.c; },
                        [&](const LinearInCount& f) { return f.c * count; },
                        [&](const LinearInTotal& f) { return f.c * s; },
                        [&](const LinearInInitialCount& f) {
                          return f.c * static_cast<double>(initial_count(spec.scaling));
                        },
                    },
                    spec.birth_rate);
}

double default_rate(const ModelSpec& spec, std::int64_t n, double s, double x) {
  if (n < 1 || !(s >= 0.0) || !(x > 0.0))
    throw DomainError("default rate needs n >= 1, s >= 0 and x > 0");
  const double raw = std::visit(
      Overloaded{
          [](const ConstantDefault& f) { return f.c; },
          [&](const HyperbolicDefault& f) {
            const double scale = f.scale_by_n ? static_cast<double>(n) : 1.0;
            return f.a * scale / (f.b + x);
          },
      },
      spec.default_rate.form);
  return std::clamp(raw, 0.0, spec.default_rate.cap);
}

Rates eval_rates(const ModelSpec& spec, std::int64_t n, double s, double x) {
  Rates out;
  out.lambda = birth_rate(spec, n, s);
  out.kappa = n >= 1 ? default_rate(spec, n, s, x) : 0.0;
  return out;
}

double default_rate_bound(const ModelSpec& spec, std::int64_t n, double /*s*/) {
  const double cap = spec.default_rate.cap;
  return std::visit(Overloaded{
                        [&](const ConstantDefault& f) { return std::min(f.c, cap); },
                        [&](const HyperbolicDefault& f) {
                          const double scale = f.scale_by_n ? static_cast<double>(n) : 1.0;
                          return std::min(f.a * scale / f.b, cap);
                        },
                    },
                    spec.default_rate.form);
}

AffineBound birth_rate_bound(const ModelSpec& spec) {
  return std::visit(Overloaded{
                        [](const ConstantRate& f) { return AffineBound{f.c, 0.0, 0.0}; },
                        [](const LinearInCount& f) { return AffineBound{0.0, f.c, 0.0}; },
                        [](const LinearInTotal& f) { return AffineBound{0.0, 0.0, f.c}; },
                        [&](const LinearInInitialCount& f) {
                          return AffineBound{f.c * static_cast<double>(initial_count(spec.scaling)),
                                             0.0, 0.0};
                        },
                    },
                    spec.birth_rate);
}

bool default_rate_x_independent(const ModelSpec& spec) {
  return std::holds_alternative<ConstantDefault>(spec.default_rate.form);
}

DistFamily contagion_law(const ModelSpec& spec, std::int64_t n) {
  if (n < 1) throw DomainError("contagion law needs n >= 1");
  return std::visit(Overloaded{
                        [&](const UniformOverCount& c) -> DistFamily {
                          return Uniform{0.0, c.d / static_cast<double>(n)};
                        },
                        [&](const UniformOverInitial& c) -> DistFamily {
                          return Uniform{0.0, c.d / static_cast<double>(initial_count(spec.scaling))};
                        },
                        [](const ConstantImpact& c) -> DistFamily { return Dirac{c.v}; },
                    },
                    spec.contagion);
}

double sample_contagion(const ModelSpec& spec, std::int64_t n, RngStream& rng) {
  return sample(contagion_law(spec, n), rng);
}

const DistFamily& birth_law(const ModelSpec& spec, std::int64_t n) {
  if (n == 0 && spec.birth_size_empty) return *spec.birth_size_empty;
  return spec.birth_size;
}

}  // namespace banksim
