#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace wlab {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::int64_t n_evals = 0;
};

// Adaptive Gauss-Kronrod (7,15) integration of f over [a, b] to absolute
// tolerance abs_tol. Throws std::runtime_error if the interval budget is
// exhausted before the tolerance is reached.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, int max_intervals = 20000);

// Same, but with a prescribed initial partition. knots must be increasing and
// span the integration domain; interior knots pin known kinks or endpoint
// singularities of the integrand.
QuadratureResult integrate_split(const std::function<double(double)>& f,
                                 const std::vector<double>& knots, double abs_tol,
                                 int max_intervals = 20000);

}  // namespace wlab
