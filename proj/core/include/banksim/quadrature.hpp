#pragma once

#include <functional>
#include <span>

namespace banksim {

/// Nodes and weights of the 64-point Gauss-Legendre rule on [-1, 1].
std::span<const double> gauss_legendre_nodes();
std::span<const double> gauss_legendre_weights();

/// Single 64-point Gauss-Legendre panel on [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b);

/// 64-point panels bisected until the two-level estimates agree within
/// abs_tol (or max_depth is reached).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-10, int max_depth = 30);

}  // namespace banksim
