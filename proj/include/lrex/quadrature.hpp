#pragma once

// Thin wrappers over Boost.Math quadrature with error-target checking.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace lrex::quad {

struct Result {
  double value;
  double error;
};

namespace detail {

template <class F>
double kronrod_recurse(F& f, double a, double b, double rel_tol, unsigned depth, double* err) {
  double e = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0, &e, &l1);
  // tolerance measured against the L1 norm so that cancelling integrands
  // (one period of an oscillation) do not force pointless refinement
  if (depth == 0 || e <= std::max(rel_tol, 1e-15) * l1 || !std::isfinite(v)) {
    *err += e;
    return v;
  }
  const double mid = 0.5 * (a + b);
  return kronrod_recurse(f, a, mid, rel_tol, depth - 1, err) + kronrod_recurse(f, mid, b, rel_tol, depth - 1, err);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (61 points) on a finite interval.
template <class F>
Result kronrod(F&& f, double a, double b, double rel_tol = 1e-13, unsigned max_depth = 12) {
  if (a == b) return {0.0, 0.0};
  double err = 0.0;
  const double v = detail::kronrod_recurse(f, a, b, rel_tol, max_depth, &err);
  return {v, err};
}

/// tanh-sinh on a finite interval; suited to integrable endpoint singularities.
template <class F>
Result tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-13) {
  if (a == b) return {0.0, 0.0};
  static thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  double err = 0.0;
  double l1 = 0.0;
  std::size_t levels = 0;
  // abscissas can land within a few ulps of a singular endpoint where the
  // integrand underflows to 0 * inf; those points carry no weight
  auto guarded = [&f](double x) {
    const double v = f(x);
    return std::isfinite(v) ? v : 0.0;
  };
  const double v = integrator.integrate(guarded, a, b, rel_tol, &err, &l1, &levels);
  return {v, err};
}

inline void check(const Result& r, double abs_target, const char* what) {
  if (!std::isfinite(r.value) || r.error > abs_target)
    throw NumericalError(std::string(what) + ": quadrature error " + std::to_string(r.error) +
                         " exceeds target " + std::to_string(abs_target));
}

}  // namespace lrex::quad
