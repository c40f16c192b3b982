#pragma once

#include <functional>
#include <vector>

namespace hlap::numerics {

/// Adaptive Gauss-Kronrod quadrature of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

/// Root of a monotone function on [lo, hi] by bisection; f(lo) and f(hi)
/// must bracket zero.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   int max_iter = 200);

std::vector<double> log_space(double lo, double hi, int n);
std::vector<double> lin_space(double lo, double hi, int n);

double median(std::vector<double> values);

/// Piecewise-linear interpolation on a sorted abscissa; clamps outside.
double interp_linear(const std::vector<double>& x, const std::vector<double>& y, double at);

/// Cubic Hermite interpolation with prescribed nodal slopes.
double interp_hermite(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& dy, double at);

} // namespace hlap::numerics
