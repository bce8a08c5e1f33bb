#pragma once

#include <optional>
#include <string>
#include <vector>

#include "banksim/limit.hpp"

namespace banksim {

/// Solution of the limiting mean equations on t_k = k * dt.
/// Setting 1 fills `m`; setting 2 fills `m` (the tilde mean) and `n_inf`.
struct OdeSolution {
  int setting = 1;
  double dt = 0.0;
  std::string scheme = "rk4";
  std::vector<double> t;
  std::vector<double> m;
  std::vector<double> n_inf;
  /// Closed forms on the same grid, present for constant coefficients.
  std::vector<double> m_closed;
  std::vector<double> n_closed;
  /// t -> infinity limits, present for constant coefficients when they exist.
  std::optional<double> m_limit;
  std::optional<double> n_limit;

  double m_terminal() const { return m.back(); }
  bool has_closed_form() const noexcept { return !m_closed.empty(); }
};

/// Right side of the setting-1 mean equation at m.
double setting1_rhs(const MeanFieldLimit& mf, double m);

/// RK4 for m' = psi(m) m + lambda(m) (Bbar - m). Requires an x-independent
/// kill rate. Throws NumericalBlowup if m leaves (0, inf).
OdeSolution solve_setting1(const MeanFieldLimit& mf, double m0, double horizon, double dt = 1e-3);

/// Root of setting1_rhs on [lo, hi] by bisection to 1e-12. Throws BracketError
/// without a sign change.
double stationary_mean(const MeanFieldLimit& mf, double lo, double hi);

/// RK4 for N' = lambda - N kappa, m' = (r - Dbar kappa N) m + lambda / N (Bbar - m)
/// with N(0) = 1.
OdeSolution solve_setting2(const MeanFieldLimit& mf, double m0, double horizon, double dt = 1e-3);

/// N(t) solving N' = lambda(t) - k(t) N, N(0) = 1, from inputs sampled on
/// t_k = k * dt, via the integrating factor exp(int k) and trapezoid sums.
std::vector<double> n_infinity_general(const std::vector<double>& kappa_moment,
                                       const std::vector<double>& lambda, double dt);

/// Same equation by RK4 with linear interpolation at half steps.
std::vector<double> n_infinity_rk4(const std::vector<double>& kappa_moment,
                                   const std::vector<double>& lambda, double dt);

}  // namespace banksim
