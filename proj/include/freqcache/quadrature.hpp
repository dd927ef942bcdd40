#pragma once

#include <functional>
#include <stdexcept>

namespace freqcache {

/// Raised when a numerical routine cannot meet its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
  int intervals = 0;
};

/// Globally adaptive 15-point Gauss-Kronrod quadrature on [a, b]. Bisects the
/// interval with the largest error estimate until the total estimate drops
/// below max(abs_tol, rel_tol * |value|). Throws NumericalError if that takes
/// more than `max_intervals` subintervals.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-12, double abs_tol = 0.0,
                           int max_intervals = 2000);

/// Complementary incomplete Beta function B'(x, y, z) = int_z^1 u^(x-1) (1-u)^(y-1) du
/// for x, y > 0 and z in [0, 1]. Both endpoint singularities are removed by
/// power substitutions before integration.
double incomplete_beta_upper(double x, double y, double z);

/// Same integral parameterized by the width w = 1 - z of the range, which
/// keeps full precision when z is within rounding of 1.
double incomplete_beta_tail(double x, double y, double w);

}  // namespace freqcache
