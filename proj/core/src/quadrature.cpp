#include "banksim/quadrature.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>

namespace banksim {
namespace {

constexpr int kPoints = 64;

struct Rule {
  std::array<double, kPoints> nodes{};
  std::array<double, kPoints> weights{};

  Rule() {
    // Newton iteration on P_64 from the Chebyshev-like initial guesses.
    for (int i = 0; i < kPoints / 2; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (kPoints + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= kPoints; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kPoints * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes[i] = -x;
      nodes[kPoints - 1 - i] = x;
      weights[i] = w;
      weights[kPoints - 1 - i] = w;
    }
  }
};

const Rule& rule() {
  static const Rule instance;
  return instance;
}

double refine(const std::function<double(double)>& f, double a, double b, double whole,
              double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gauss_legendre(f, a, mid);
  const double right = gauss_legendre(f, mid, b);
  const double sum = left + right;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(sum);
  if (depth <= 0 || std::abs(sum - whole) <= std::max(tol, floor)) return sum;
  return refine(f, a, mid, left, 0.5 * tol, depth - 1) +
         refine(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

std::span<const double> gauss_legendre_nodes() { return rule().nodes; }
std::span<const double> gauss_legendre_weights() { return rule().weights; }

double gauss_legendre(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = rule();
  const double half = 0.5 * (b - a);
  const double centre = 0.5 * (a + b);
  double sum = 0.0;
  for (int i = 0; i < kPoints; ++i) sum += r.weights[i] * f(centre + half * r.nodes[i]);
  return sum * half;
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  return refine(f, a, b, gauss_legendre(f, a, b), abs_tol, max_depth);
}

}  // namespace banksim
