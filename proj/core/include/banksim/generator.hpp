#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "banksim/limit.hpp"
#include "banksim/measure.hpp"
#include "banksim/model.hpp"
#include "banksim/simulator.hpp"

namespace banksim {

/// x^p
struct Monomial {
  double p = 1.0;
};
/// x / (1 + x)
struct BoundedRational {};
/// exp(-a x)
struct ExpNeg {
  double a = 1.0;
};
/// Logistic step 1 / (1 + exp((x - d) / w)), a smoothed 1{x <= d}.
struct SmoothIndicator {
  double d = 1.0;
  double w = 0.1;
};

using TestFunction = std::variant<Monomial, BoundedRational, ExpNeg, SmoothIndicator>;

double value(const TestFunction& f, double x);
/// D1 f(x) = x f'(x)
double d1(const TestFunction& f, double x);
/// D2 f(x) = x^2 f''(x)
double d2(const TestFunction& f, double x);
/// GBM generator with drift coefficient `drift`: drift * D1 f + sigma^2/2 * D2 f.
double gbm_generator(const TestFunction& f, double x, double drift, double sigma);
/// E[f(x (1 - Z))] for Z drawn from `impact`.
double contagion_average(const TestFunction& f, double x, const DistFamily& impact);
/// E[f(Y)] for Y drawn from `dist`; analytic for monomials.
double birth_average(const TestFunction& f, const DistFamily& dist);

/// Generator of the finite system applied to x -> (mu_x, f).
double gen_empirical(const SystemState& state, const ModelSpec& spec, const TestFunction& f);

/// Generator applied to x -> f(x_1), bank 1 being the lowest id alive.
double gen_tagged(const SystemState& state, const ModelSpec& spec, const TestFunction& f);

/// Drift of V0(x) = s(x) + n(x).
double lyapunov_phi(const SystemState& state, const ModelSpec& spec);

/// Equal-split probe states (s/n, ..., s/n) for every (s, n) on the grids;
/// points with s <= s0 and n <= n0 form the compact window.
struct StabilityProbe {
  std::vector<double> s_grid;
  std::vector<std::int64_t> n_grid;
  double s0 = 10.0;
  std::int64_t n0 = 10;

  static StabilityProbe standard(double s0, std::int64_t n0);
};

struct LyapunovReport {
  double phi_value = 0.0;
  bool conservative_bound_ok = false;
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;
  double stable_margin = 0.0;
  /// sup of phi / (s + n) outside the window
  double exp_rate_sup = 0.0;
  bool exp_rate_condition_ok = false;
  std::size_t probes = 0;
};

LyapunovReport stability_report(const ModelSpec& spec, const SystemState& at, const StabilityProbe& probe);

/// Limiting operator A(nu, f); with setting2_scale = n_inf the setting-2
/// variant (contagion drift scaled by n_inf, birth term by 1 / n_inf).
double limit_operator_A(const EmpiricalMeasure& nu, const MeanFieldLimit& mf, const TestFunction& f,
                        std::optional<double> setting2_scale = std::nullopt);

struct RateBoundCheck {
  bool ok = true;
  std::optional<std::int64_t> first_violation;
};

/// Checks lambda*_n V(n+1) + n kappa*_n V(n-1) - (lambda*_n + n kappa*_n) V(n)
/// <= -alpha V(n) for 1 <= n <= n_max.
RateBoundCheck verify_rate_bound(const std::function<double(std::int64_t)>& lambda_star,
                                 const std::function<double(std::int64_t)>& kappa_star,
                                 const std::function<double(std::int64_t)>& vhat, double alpha,
                                 std::int64_t n_max);

}  // namespace banksim
