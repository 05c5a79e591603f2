#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <stdexcept>

namespace smnreg {

struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Adaptive integration of f over (0, inf), double-exponential rule.
// Relative error target 1e-8 at the default tolerance; throws
// QuadratureError when the rule fails to converge or the result is
// non-finite.  Integrands that are themselves noisy (nested quadrature)
// can pass a looser tolerance.
template <typename F>
double integrate_positive_axis(F&& f, double rel_tol = 1e-9) {
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0, l1 = 0.0;
  double value;
  try {
    value = integrator.integrate(f, rel_tol, &error, &l1);
  } catch (const std::exception& e) {
    throw QuadratureError(std::string("quadrature on (0,inf) failed: ") + e.what());
  }
  if (!std::isfinite(value))
    throw QuadratureError("quadrature on (0,inf) returned a non-finite value");
  // values this small are underflow residue; the relative error estimate
  // carries no information there
  const double budget = std::max(1e-6, 50.0 * rel_tol);
  if (std::abs(value) > 1e-280 && error / std::abs(value) > budget)
    throw QuadratureError("quadrature on (0,inf) did not reach the error target");
  return value;
}

}  // namespace smnreg
