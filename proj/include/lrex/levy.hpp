#pragma once

#include <algorithm>

#include "error.hpp"
#include "kernel.hpp"

namespace lrex {

/// Coefficients (alpha, c+, c-) of a stable generator
/// L f(x) = int c(y) |y|^{-1-alpha} (f(x+y) - f(x) - theta(y) f'(x)) dy.
struct LevyCoefficients {
  double alpha = 1.5;
  double c_plus = 1.0;
  double c_minus = 1.0;

  static LevyCoefficients from(const KernelParams& p) { return {p.alpha, p.c_plus, p.c_minus}; }

  /// Adjoint generator: jumps reversed.
  LevyCoefficients adjoint() const { return {alpha, c_minus, c_plus}; }
  /// Symmetric part (L + L*) / 2.
  LevyCoefficients symmetric_part() const {
    const double c = 0.5 * (c_plus + c_minus);
    return {alpha, c, c};
  }
  bool symmetric() const { return c_plus == c_minus; }

  void validate() const {
    detail::require(alpha > 0.0 && alpha < 2.0, "LevyCoefficients: alpha must lie in (0, 2)");
    detail::require(c_plus >= 0.0 && c_minus >= 0.0 && c_plus + c_minus > 0.0,
                    "LevyCoefficients: amplitudes must be nonnegative and not both zero");
  }
};

/// Coefficients of the skewed generator L^rho:
/// c+ (1 - rho) + c- rho for positive jumps, c+ rho + c- (1 - rho) for negative ones.
struct RhoCoefficients {
  double c_rho_plus;
  double c_rho_minus;
  double rho;
  double alpha;

  static RhoCoefficients from(const KernelParams& p, double rho) {
    detail::require(rho > 0.0 && rho < 1.0, "RhoCoefficients: rho must lie in (0, 1)");
    return {p.c_plus * (1.0 - rho) + p.c_minus * rho, p.c_plus * rho + p.c_minus * (1.0 - rho), rho, p.alpha};
  }

  LevyCoefficients levy() const { return {alpha, c_rho_plus, c_rho_minus}; }
  operator LevyCoefficients() const { return levy(); }
};

/// Compensation theta^alpha(y): 0, y 1(|y| <= 1) or y for alpha <, =, > 1.
inline double theta(double alpha, double y) {
  if (alpha < 1.0) return 0.0;
  if (alpha == 1.0) return std::fabs(y) <= 1.0 ? y : 0.0;
  return y;
}

}  // namespace lrex
