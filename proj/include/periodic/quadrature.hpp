#pragma once

#include <functional>

namespace periodic::quadrature {

struct Result {
  double value = 0.0;
  double abs_err = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Adaptive Gauss–Kronrod (7/15) on [a, b], bisecting the interval with the
/// largest error estimate until the total estimate is below
/// max(abs_tol, rel_tol * |value|) or `max_intervals` is reached.
Result integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 double rel_tol = 0.0, int max_intervals = 2000);

}  // namespace periodic::quadrature
