#pragma once

#include <cmath>
#include <cstdint>

#include "error.hpp"

namespace lrex {

/// Sum over k >= k0 of (a + b k)^(-s) for s > 1, b > 0 and a + b k0 > 0.
///
/// Terms are added explicitly until the argument reaches `cutoff` (measured in
/// units of b); the remainder is closed with the Euler-Maclaurin formula up to
/// the fifth derivative, whose next correction is below 1e-18 relative for
/// cutoff >= 200.
inline double power_sum(double s, double a, double b, std::int64_t k0, std::int64_t cutoff = 256) {
  detail::require(s > 1.0, "power_sum: exponent must exceed 1");
  detail::require(b > 0.0 && a + b * static_cast<double>(k0) > 0.0, "power_sum: nonpositive base");
  // first index whose argument is at least cutoff * b
  std::int64_t k_tail = k0;
  const double need = static_cast<double>(cutoff) * b;
  if (a + b * static_cast<double>(k_tail) < need)
    k_tail = static_cast<std::int64_t>(std::ceil((need - a) / b));
  double head = 0.0;
  for (std::int64_t k = k0; k < k_tail; ++k) head += std::pow(a + b * static_cast<double>(k), -s);

  const double x = a + b * static_cast<double>(k_tail);
  const double g = std::pow(x, -s);
  const double r = b / x;
  const double integral = x * g / (b * (s - 1.0));
  const double d1 = -s * r * g;
  const double d3 = -s * (s + 1.0) * (s + 2.0) * r * r * r * g;
  const double d5 = -s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * r * r * r * r * r * g;
  const double tail = integral + 0.5 * g - d1 / 12.0 + d3 / 720.0 - d5 / 30240.0;
  return head + tail;
}

/// Riemann zeta function for s > 1 from `power_sum`.
inline double zeta(double s, std::int64_t cutoff = 256) { return power_sum(s, 0.0, 1.0, 1, cutoff); }

/// Partial harmonic-type sum of k^(-s) for k = 1..m.
inline double partial_power_sum(double s, std::int64_t m) {
  double acc = 0.0;
  for (std::int64_t k = m; k >= 1; --k) acc += std::pow(static_cast<double>(k), -s);
  return acc;
}

}  // namespace lrex
