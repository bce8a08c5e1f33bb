#include "banksim/ode.hpp"

#include <array>
#include <cmath>

#include "banksim/error.hpp"
#include "banksim/quadrature.hpp"

namespace banksim {

namespace {

std::size_t step_count(double horizon, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be >= 0");
  return static_cast<std::size_t>(std::llround(horizon / dt));
}

void require_x_independent(const MeanFieldLimit& mf) {
  mf.validate();
  if (!mf.kappa_x_independent())
    throw DomainError("the mean equation needs a reserve-independent kill rate; use the particle system");
}

// kappa for a reserve-independent kill rate
double kappa_of(const MeanFieldLimit& mf, double y) { return mf.kappa_at(y, 1.0); }

void check_positive(double v, double t, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw NumericalBlowup(std::string(what) + " left (0, inf) at t=" + std::to_string(t));
}

}  // namespace

double setting1_rhs(const MeanFieldLimit& mf, double m) {
  return (mf.r - mf.dbar * kappa_of(mf, m)) * m + mf.lambda_at(m) * (mf.birth_mean() - m);
}

OdeSolution solve_setting1(const MeanFieldLimit& mf, double m0, double horizon, double dt) {
  require_x_independent(mf);
  if (!(m0 > 0.0)) throw DomainError("m0 must be positive");
  const std::size_t steps = step_count(horizon, dt);
  OdeSolution sol;
  sol.setting = 1;
  sol.dt = dt;
  sol.t.resize(steps + 1);
  sol.m.resize(steps + 1);
  sol.m[0] = m0;
  double m = m0;
  for (std::size_t k = 0; k <= steps; ++k) {
    sol.t[k] = static_cast<double>(k) * dt;
    if (k == 0) continue;
    const double k1 = setting1_rhs(mf, m);
    const double k2 = setting1_rhs(mf, m + 0.5 * dt * k1);
    const double k3 = setting1_rhs(mf, m + 0.5 * dt * k2);
    const double k4 = setting1_rhs(mf, m + dt * k3);
    m += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_positive(m, sol.t[k], "m");
    sol.m[k] = m;
  }

  if (mf.all_constant()) {
    const double lambda = mf.lambda_at(m0);
    const double bbar = mf.birth_mean();
    const double gamma = mf.r - mf.dbar * kappa_of(mf, m0) - lambda;
    sol.m_closed.resize(sol.t.size());
    if (gamma == 0.0) {
      for (std::size_t k = 0; k < sol.t.size(); ++k) sol.m_closed[k] = m0 + lambda * bbar * sol.t[k];
    } else {
      const double big_m = -lambda * bbar / gamma;
      for (std::size_t k = 0; k < sol.t.size(); ++k)
        sol.m_closed[k] = (m0 - big_m) * std::exp(gamma * sol.t[k]) + big_m;
      if (gamma < 0.0) sol.m_limit = big_m;
    }
  }
  return sol;
}

double stationary_mean(const MeanFieldLimit& mf, double lo, double hi) {
  require_x_independent(mf);
  if (!(lo < hi)) throw DomainError("bracket must satisfy lo < hi");
  double flo = setting1_rhs(mf, lo);
  const double fhi = setting1_rhs(mf, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw BracketError("no sign change of the stationary equation on [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = setting1_rhs(mf, mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

OdeSolution solve_setting2(const MeanFieldLimit& mf, double m0, double horizon, double dt) {
  require_x_independent(mf);
  if (!(m0 > 0.0)) throw DomainError("m0 must be positive");
  const std::size_t steps = step_count(horizon, dt);
  const double bbar = mf.birth_mean();
  auto rhs = [&](const std::array<double, 2>& y) {
    const double n = y[0];
    const double m = y[1];
    const double lambda = mf.lambda_at(m);
    const double kappa = kappa_of(mf, m);
    return std::array<double, 2>{lambda - n * kappa,
                                 (mf.r - mf.dbar * kappa * n) * m + lambda / n * (bbar - m)};
  };
  auto axpy = [](const std::array<double, 2>& y, double a, const std::array<double, 2>& d) {
    return std::array<double, 2>{y[0] + a * d[0], y[1] + a * d[1]};
  };

  OdeSolution sol;
  sol.setting = 2;
  sol.dt = dt;
  sol.t.resize(steps + 1);
  sol.m.resize(steps + 1);
  sol.n_inf.resize(steps + 1);
  std::array<double, 2> y{1.0, m0};
  sol.n_inf[0] = 1.0;
  sol.m[0] = m0;
  for (std::size_t k = 1; k <= steps; ++k) {
    sol.t[k] = static_cast<double>(k) * dt;
    const auto k1 = rhs(y);
    const auto k2 = rhs(axpy(y, 0.5 * dt, k1));
    const auto k3 = rhs(axpy(y, 0.5 * dt, k2));
    const auto k4 = rhs(axpy(y, dt, k3));
    for (int i = 0; i < 2; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    check_positive(y[0], sol.t[k], "N_inf");
    check_positive(y[1], sol.t[k], "m");
    sol.n_inf[k] = y[0];
    sol.m[k] = y[1];
  }

  if (mf.all_constant()) {
    const double lambda = mf.lambda_at(m0);
    const double kappa = kappa_of(mf, m0);
    // N(t), int_0^t N and int_0^t 1/N in closed form
    auto n_of = [&](double t) {
      return kappa > 0.0 ? lambda / kappa - (lambda / kappa - 1.0) * std::exp(-kappa * t) : 1.0 + lambda * t;
    };
    auto int_n = [&](double t) {
      if (kappa == 0.0) return t + 0.5 * lambda * t * t;
      const double a = lambda / kappa;
      return a * t - (a - 1.0) * (-std::expm1(-kappa * t)) / kappa;
    };
    auto int_inv_n = [&](double t) {
      if (lambda == 0.0) return 0.0;  // only ever multiplied by lambda
      if (kappa == 0.0) return std::log1p(lambda * t) / lambda;
      return (kappa * t + std::log(n_of(t))) / lambda;
    };
    auto log_phi = [&](double t) { return mf.r * t - mf.dbar * kappa * int_n(t) - lambda * int_inv_n(t); };

    sol.n_closed.resize(sol.t.size());
    sol.m_closed.resize(sol.t.size());
    double acc = 0.0;  // int_0^t exp(-log_phi(u)) / N(u) du
    for (std::size_t k = 0; k < sol.t.size(); ++k) {
      const double t = sol.t[k];
      if (k > 0 && lambda > 0.0)
        acc += gauss_legendre([&](double u) { return std::exp(-log_phi(u)) / n_of(u); }, sol.t[k - 1], t);
      sol.n_closed[k] = n_of(t);
      sol.m_closed[k] = std::exp(log_phi(t)) * (m0 + lambda * bbar * acc);
    }
    if (kappa > 0.0) {
      sol.n_limit = lambda / kappa;
      const double denom = mf.dbar * lambda + kappa - mf.r;
      if (lambda > 0.0 && denom > 0.0) sol.m_limit = kappa * bbar / denom;
    }
  }
  return sol;
}

namespace {

void check_inputs(const std::vector<double>& a, const std::vector<double>& b, double dt) {
  if (a.size() != b.size()) throw DomainError("input grids are not aligned");
  if (a.empty()) throw DomainError("input grids are empty");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
}

}  // namespace

std::vector<double> n_infinity_general(const std::vector<double>& kappa_moment,
                                       const std::vector<double>& lambda, double dt) {
  check_inputs(kappa_moment, lambda, dt);
  std::vector<double> out(kappa_moment.size());
  out[0] = 1.0;
  double log_k = 0.0;      // int_0^t kappa
  double weighted = 0.0;   // int_0^t lambda(u) K(u) du
  double prev_term = lambda[0];
  for (std::size_t i = 1; i < out.size(); ++i) {
    log_k += 0.5 * dt * (kappa_moment[i - 1] + kappa_moment[i]);
    const double term = lambda[i] * std::exp(log_k);
    weighted += 0.5 * dt * (prev_term + term);
    prev_term = term;
    out[i] = (1.0 + weighted) * std::exp(-log_k);
  }
  return out;
}

std::vector<double> n_infinity_rk4(const std::vector<double>& kappa_moment,
                                   const std::vector<double>& lambda, double dt) {
  check_inputs(kappa_moment, lambda, dt);
  std::vector<double> out(kappa_moment.size());
  out[0] = 1.0;
  double n = 1.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double k0 = kappa_moment[i - 1], k1 = kappa_moment[i];
    const double l0 = lambda[i - 1], l1 = lambda[i];
    const double kh = 0.5 * (k0 + k1), lh = 0.5 * (l0 + l1);
    const double a1 = l0 - k0 * n;
    const double a2 = lh - kh * (n + 0.5 * dt * a1);
    const double a3 = lh - kh * (n + 0.5 * dt * a2);
    const double a4 = l1 - k1 * (n + dt * a3);
    n += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    out[i] = n;
  }
  return out;
}

}  // namespace banksim
