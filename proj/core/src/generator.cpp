#include "banksim/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "banksim/error.hpp"
#include "banksim/overloaded.hpp"
#include "banksim/quadrature.hpp"

namespace banksim {

namespace {

double logistic(double x, const SmoothIndicator& g) { return 1.0 / (1.0 + std::exp((x - g.d) / g.w)); }

}  // namespace

double value(const TestFunction& f, double x) {
  return std::visit(Overloaded{
                        [x](const Monomial& m) { return std::pow(x, m.p); },
                        [x](const BoundedRational&) { return x / (1.0 + x); },
                        [x](const ExpNeg& e) { return std::exp(-e.a * x); },
                        [x](const SmoothIndicator& g) { return logistic(x, g); },
                    },
                    f);
}

double d1(const TestFunction& f, double x) {
  return std::visit(Overloaded{
                        [x](const Monomial& m) { return m.p * std::pow(x, m.p); },
                        [x](const BoundedRational&) { return x / ((1.0 + x) * (1.0 + x)); },
                        [x](const ExpNeg& e) { return -e.a * x * std::exp(-e.a * x); },
                        [x](const SmoothIndicator& g) {
                          const double v = logistic(x, g);
                          return -x * v * (1.0 - v) / g.w;
                        },
                    },
                    f);
}

double d2(const TestFunction& f, double x) {
  return std::visit(Overloaded{
                        [x](const Monomial& m) { return m.p * (m.p - 1.0) * std::pow(x, m.p); },
                        [x](const BoundedRational&) { return -2.0 * x * x / std::pow(1.0 + x, 3); },
                        [x](const ExpNeg& e) { return e.a * e.a * x * x * std::exp(-e.a * x); },
                        [x](const SmoothIndicator& g) {
                          const double v = logistic(x, g);
                          return x * x * v * (1.0 - v) * (1.0 - 2.0 * v) / (g.w * g.w);
                        },
                    },
                    f);
}

double gbm_generator(const TestFunction& f, double x, double drift, double sigma) {
  return drift * d1(f, x) + 0.5 * sigma * sigma * d2(f, x);
}

double contagion_average(const TestFunction& f, double x, const DistFamily& impact) {
  if (const auto* dirac = std::get_if<Dirac>(&impact)) return value(f, x * (1.0 - dirac->v));
  if (const auto* uni = std::get_if<Uniform>(&impact)) {
    const double width = uni->hi - uni->lo;
    if (const auto* m = std::get_if<Monomial>(&f)) {
      // E[(1 - Z)^p], Z ~ U(lo, hi)
      const double a = 1.0 - uni->hi;
      const double b = 1.0 - uni->lo;
      return std::pow(x, m->p) * (std::pow(b, m->p + 1.0) - std::pow(a, m->p + 1.0)) / ((m->p + 1.0) * width);
    }
    return gauss_legendre([&](double z) { return value(f, x * (1.0 - z)); }, uni->lo, uni->hi) / width;
  }
  return expectation(impact, [&](double z) { return value(f, x * (1.0 - z)); });
}

double birth_average(const TestFunction& f, const DistFamily& dist) {
  if (const auto* m = std::get_if<Monomial>(&f)) return moment(dist, m->p);
  return expectation(dist, [&](double y) { return value(f, y); });
}

double gen_empirical(const SystemState& state, const ModelSpec& spec, const TestFunction& f) {
  const std::int64_t n = state.count();
  if (n == 0) throw EmptyState();
  const double nd = static_cast<double>(n);
  const double s = state.total();

  double mean_f = 0.0;
  double i1 = 0.0;
  for (const auto& b : state.banks) {
    mean_f += value(f, b.reserve);
    i1 += gbm_generator(f, b.reserve, spec.r, spec.sigma);
  }
  mean_f /= nd;
  i1 /= nd;

  const double lambda = birth_rate(spec, n, s);
  const double i2 = lambda > 0.0 ? lambda / (nd + 1.0) * (birth_average(f, birth_law(spec, n)) - mean_f) : 0.0;

  double i3 = 0.0;
  if (n == 1) {
    const double x = state.banks[0].reserve;
    i3 = -default_rate(spec, n, s, x) * value(f, x);
  } else {
    const DistFamily impact = contagion_law(spec, n);
    std::vector<double> g(state.banks.size());
    double g_sum = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] = contagion_average(f, state.banks[i].reserve, impact);
      g_sum += g[i];
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double kappa = default_rate(spec, n, s, state.banks[i].reserve);
      if (kappa == 0.0) continue;
      i3 += kappa * ((g_sum - g[i]) / (nd - 1.0) - mean_f);
    }
  }
  return i1 + i2 + i3;
}

double gen_tagged(const SystemState& state, const ModelSpec& spec, const TestFunction& f) {
  const std::int64_t n = state.count();
  if (n == 0) throw EmptyState();
  const double s = state.total();
  const double x1 = state.banks[0].reserve;
  const double f1 = value(f, x1);
  double out = gbm_generator(f, x1, spec.r, spec.sigma) - default_rate(spec, n, s, x1) * f1;
  if (n >= 2) {
    const double jump = contagion_average(f, x1, contagion_law(spec, n)) - f1;
    double kappa_others = 0.0;
    for (std::size_t i = 1; i < state.banks.size(); ++i)
      kappa_others += default_rate(spec, n, s, state.banks[i].reserve);
    out += kappa_others * jump;
  }
  return out;
}

double lyapunov_phi(const SystemState& state, const ModelSpec& spec) {
  const std::int64_t n = state.count();
  const double s = state.total();
  double phi = spec.r * s + birth_rate(spec, n, s) * (mean(birth_law(spec, n)) + 1.0);
  if (n == 0) return phi;
  const double dbar = mean(contagion_law(spec, n));
  for (const auto& b : state.banks) {
    const double kappa = default_rate(spec, n, s, b.reserve);
    phi -= kappa * (dbar * s + 1.0) + b.reserve * kappa * (1.0 - dbar);
  }
  return phi;
}

StabilityProbe StabilityProbe::standard(double s0, std::int64_t n0) {
  StabilityProbe p;
  p.s0 = s0;
  p.n0 = n0;
  for (int k = -8; k <= 32; ++k) p.s_grid.push_back(std::pow(10.0, k / 8.0));
  p.n_grid = {0, 1, 2, 3, 5, 8, 10, 15, 20, 30, 50, 100, 200, 500, 1000};
  return p;
}

LyapunovReport stability_report(const ModelSpec& spec, const SystemState& at, const StabilityProbe& probe) {
  spec.validate();
  LyapunovReport rep;
  rep.phi_value = lyapunov_phi(at, spec);

  const AffineBound lb = birth_rate_bound(spec);
  double bbar = mean(spec.birth_size);
  if (spec.birth_size_empty) bbar = std::max(bbar, mean(*spec.birth_size_empty));
  rep.c1 = spec.r + lb.per_reserve * (bbar + 1.0);
  rep.c2 = lb.per_bank * (bbar + 1.0);
  rep.c3 = lb.constant * (bbar + 1.0);

  rep.conservative_bound_ok = true;
  rep.stable_margin = -std::numeric_limits<double>::infinity();
  rep.exp_rate_sup = -std::numeric_limits<double>::infinity();
  for (std::int64_t n : probe.n_grid) {
    for (double s : probe.s_grid) {
      SystemState x;
      if (n > 0) x = SystemState::from_reserves(std::vector<double>(static_cast<std::size_t>(n), s / static_cast<double>(n)));
      const double st = n > 0 ? s : 0.0;
      const double phi = lyapunov_phi(x, spec);
      ++rep.probes;
      const double bound = rep.c1 * st + rep.c2 * static_cast<double>(n) + rep.c3;
      if (phi > bound + 1e-9 * std::max(1.0, std::abs(bound))) rep.conservative_bound_ok = false;
      const bool inside = st <= probe.s0 && n <= probe.n0;
      if (!inside) {
        rep.stable_margin = std::max(rep.stable_margin, phi);
        rep.exp_rate_sup = std::max(rep.exp_rate_sup, phi / (st + static_cast<double>(n)));
      }
      if (n == 0) break;
    }
  }
  rep.exp_rate_condition_ok = rep.exp_rate_sup < 0.0;
  return rep;
}

double limit_operator_A(const EmpiricalMeasure& nu, const MeanFieldLimit& mf, const TestFunction& f,
                        std::optional<double> setting2_scale) {
  if (nu.empty()) throw EmptyMeasure();
  if (setting2_scale && !(*setting2_scale > 0.0)) throw DomainError("setting-2 scale must be positive");
  const double scale = setting2_scale.value_or(1.0);
  const double y = nu.mean();
  const double inv = 1.0 / static_cast<double>(nu.size());

  double nu_f = 0.0;
  double nu_kappa = 0.0;
  double nu_kappa_f = 0.0;
  for (double x : nu.samples()) {
    const double kappa = mf.kappa_at(y, x);
    const double fx = value(f, x);
    nu_f += fx;
    nu_kappa += kappa;
    nu_kappa_f += kappa * fx;
  }
  nu_f *= inv;
  nu_kappa *= inv;
  nu_kappa_f *= inv;

  // every survivor is hit by the population default flow (nu, kappa)
  const double drift = mf.r - scale * mf.dbar * nu_kappa;
  double diffusion = 0.0;
  for (double x : nu.samples()) diffusion += gbm_generator(f, x, drift, mf.sigma);
  diffusion *= inv;

  const double lambda = mf.lambda_at(y);
  const double birth = lambda > 0.0 ? lambda / scale * (birth_average(f, mf.birth) - nu_f) : 0.0;
  return diffusion + birth + (nu_f * nu_kappa - nu_kappa_f);
}

RateBoundCheck verify_rate_bound(const std::function<double(std::int64_t)>& lambda_star,
                                 const std::function<double(std::int64_t)>& kappa_star,
                                 const std::function<double(std::int64_t)>& vhat, double alpha,
                                 std::int64_t n_max) {
  if (n_max < 1) throw DomainError("n_max must be >= 1");
  if (vhat(0) != 1.0) throw DomainError("Vhat(0) must equal 1");
  for (std::int64_t n = 1; n <= n_max + 1; ++n)
    if (vhat(n) < vhat(n - 1)) throw DomainError("Vhat must be nondecreasing");

  RateBoundCheck out;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    const double lam = lambda_star(n);
    const double kap = static_cast<double>(n) * kappa_star(n);
    const double v = vhat(n);
    const double up = lam * vhat(n + 1);
    const double down = kap * vhat(n - 1);
    const double stay = (lam + kap) * v;
    const double lhs = up + down - stay;
    const double rhs = -alpha * v;
    const double tol = 1e-12 * std::max({std::abs(up), std::abs(down), std::abs(stay), std::abs(rhs), 1.0});
    if (lhs > rhs + tol) {
      out.ok = false;
      out.first_violation = n;
      break;
    }
  }
  return out;
}

}  // namespace banksim
