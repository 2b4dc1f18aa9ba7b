#pragma once

// Discrete and continuous fractional generators and their Dirichlet forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "levy.hpp"
#include "quadrature.hpp"
#include "test_function.hpp"

namespace lrex {

// ---------------------------------------------------------------------------
// Discrete generator L_n (plain) and L_n^rho.

/// plain: n^a sum_y p(y)(f(u + y/n) - f(u)) - (m_n/n) f'(u)
/// rho:   n^a sum_y ((1-rho) p(y) + rho p(-y))(f(u + y/n) - f(u)) - (1-2rho)(m_n/n) f'(u)
class DiscreteGenerator {
 public:
  DiscreteGenerator(const JumpKernel& kernel, std::int64_t n, std::optional<double> rho = std::nullopt)
      : kernel_(kernel), n_(n), rho_(rho) {
    detail::require(n >= 1, "DiscreteGenerator: n must be at least 1");
    if (rho_) detail::require(*rho_ > 0.0 && *rho_ < 1.0, "DiscreteGenerator: rho must lie in (0, 1)");
    const double m_n = centering_constant(kernel_, n_);
    drift_ = (rho_ ? (1.0 - 2.0 * *rho_) : 1.0) * m_n / static_cast<double>(n_);
    scale_ = std::pow(static_cast<double>(n_), kernel_.alpha());
  }

  std::int64_t n() const { return n_; }
  std::optional<double> rho() const { return rho_; }
  /// Velocity term multiplying f'(u).
  double drift() const { return drift_; }

  /// Jump weight of displacement d in this variant.
  double weight(Site d) const {
    if (!rho_) return kernel_(d);
    return (1.0 - *rho_) * kernel_(d) + *rho_ * kernel_(-d);
  }

  /// Value at the macroscopic point u (not necessarily on the lattice).
  double operator()(const TestFunction& f, double u) const {
    const double nn = static_cast<double>(n_);
    const double lo = std::ceil((f.center() - f.support_radius() - u) * nn);
    const double hi = std::floor((f.center() + f.support_radius() - u) * nn);
    if (hi - lo > 5e8) throw NumericalError("discrete generator: displacement window too large");
    double acc = 0.0;
    if (hi >= lo) {
      for (auto d = static_cast<Site>(lo); d <= static_cast<Site>(hi); ++d) {
        if (d == 0) continue;
        acc += weight(d) * f(u + static_cast<double>(d) / nn);
      }
    }
    // every displacement outside the window sees f = 0 (below 1e-14)
    return scale_ * (acc - kernel_.total_rate() * f(u)) - drift_ * f.derivative(u, 1);
  }

 private:
  JumpKernel kernel_;
  std::int64_t n_;
  std::optional<double> rho_;
  double drift_ = 0.0;
  double scale_ = 1.0;
};

/// L_n f (or L_n^rho f) at the lattice points x/n.
inline std::vector<double> apply_discrete_generator(const JumpKernel& kernel, std::optional<double> rho,
                                                    const TestFunction& f, std::int64_t n,
                                                    std::span<const Site> sites) {
  const DiscreteGenerator gen(kernel, n, rho);
  std::vector<double> out;
  out.reserve(sites.size());
  for (Site x : sites) out.push_back(gen(f, static_cast<double>(x) / static_cast<double>(n)));
  return out;
}

// ---------------------------------------------------------------------------
// Continuous generator by quadrature.

namespace detail {

/// c * int_0^inf y^{-1-a} (f(x + s y) - f(x) - theta(s y) f'(x)) dy for one side s = +-1.
inline double generator_side(const LevyCoefficients& lc, double amp, double sign, const TestFunction& f, double x,
                             double abs_target) {
  if (amp == 0.0) return 0.0;
  const double a = lc.alpha;
  const double f0 = f(x);
  const double f1 = f.derivative(x, 1);
  const double f2 = f.derivative(x, 2);
  const double f3 = f.derivative(x, 3);
  const double f4 = f.derivative(x, 4);
  const double f5 = f.derivative(x, 5);
  const double y_series = 1e-3 * f.width();

  // |y| <= 1, compensated by y f'(x) in every regime
  auto inner = [&](double y) {
    double diff;
    if (y < y_series) {
      diff = y * y * (0.5 * f2 + y * (sign * f3 / 6.0 + y * (f4 / 24.0 + y * sign * f5 / 120.0)));
    } else {
      diff = f(x + sign * y) - f0 - sign * y * f1;
    }
    return diff * std::pow(y, -1.0 - a);
  };
  const auto in = quad::tanh_sinh(inner, 0.0, 1.0, 1e-13);
  quad::check(in, abs_target / 4.0 / amp, "continuous generator (inner)");
  double total = in.value;
  if (a < 1.0) total += sign * f1 / (1.0 - a);  // theta = 0: undo the compensation

  // |y| > 1: only the f(x + s y) part needs numerics
  const double lo_pt = f.center() - f.support_radius();
  const double hi_pt = f.center() + f.support_radius();
  double ylo = sign > 0 ? lo_pt - x : x - hi_pt;
  double yhi = sign > 0 ? hi_pt - x : x - lo_pt;
  ylo = std::max(ylo, 1.0);
  if (yhi > ylo) {
    auto outer = [&](double y) { return f(x + sign * y) * std::pow(y, -1.0 - a); };
    const auto out = quad::kronrod(outer, ylo, yhi, 1e-13);
    quad::check(out, abs_target / 4.0 / amp, "continuous generator (outer)");
    total += out.value;
  }
  total -= f0 / a;
  if (a > 1.0) total -= sign * f1 / (a - 1.0);
  return amp * total;
}

}  // namespace detail

/// L f(x) for the stable generator with coefficients `lc`, absolute error target 1e-8.
inline double continuous_generator_at(const LevyCoefficients& lc, const TestFunction& f, double x,
                                      double abs_target = 1e-8) {
  lc.validate();
  return detail::generator_side(lc, lc.c_plus, 1.0, f, x, abs_target) +
         detail::generator_side(lc, lc.c_minus, -1.0, f, x, abs_target);
}

inline std::vector<double> apply_continuous_generator(const LevyCoefficients& lc, const TestFunction& f,
                                                      std::span<const double> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (double x : points) out.push_back(continuous_generator_at(lc, f, x));
  return out;
}

// ---------------------------------------------------------------------------
// Dirichlet forms.

/// ||f||^2 by quadrature over the effective support.
inline double l2_norm_squared(const TestFunction& f, int derivative_order = 0) {
  const double r = f.support_radius();
  auto g = [&](double x) {
    const double v = f.derivative(x, derivative_order);
    return v * v;
  };
  // split at the center so both halves are smooth and well resolved
  const auto left = quad::kronrod(g, f.center() - r, f.center());
  const auto right = quad::kronrod(g, f.center(), f.center() + r);
  return left.value + right.value;
}

/// <f, g> by quadrature.
inline double inner_product(const TestFunction& f, const TestFunction& g) {
  const double lo = std::max(f.center() - f.support_radius(), g.center() - g.support_radius());
  const double hi = std::min(f.center() + f.support_radius(), g.center() + g.support_radius());
  if (hi <= lo) return 0.0;
  auto h = [&](double x) { return f(x) * g(x); };
  const double mid = 0.5 * (lo + hi);
  return quad::kronrod(h, lo, mid).value + quad::kronrod(h, mid, hi).value;
}

/// E(f) = (c+ + c-)/4 int int (f(y) - f(x))^2 / |y - x|^{1+a} dx dy.
inline double dirichlet_form_continuous(const LevyCoefficients& lc, const TestFunction& f) {
  lc.validate();
  const double a = lc.alpha;
  const double r = f.support_radius();
  const double norm2 = l2_norm_squared(f);
  const double d1 = l2_norm_squared(f, 1);
  const double d2 = l2_norm_squared(f, 2);
  // D(z) = int (f(x + z) - f(x))^2 dx equals 2 ||f||^2 once z > 2R
  const double z_far = 2.0 * r;
  auto diff_energy = [&](double z) {
    if (z < 1e-4 * f.width()) return z * z * (d1 - z * z * d2 / 12.0);
    // the integrand is Schwartz in x, so the trapezoid rule converges spectrally
    const double h = f.width() / 24.0;
    const double lo = f.center() - r - z;
    const auto steps = static_cast<std::int64_t>(std::ceil((2.0 * r + z) / h));
    double acc = 0.0;
    for (std::int64_t j = 0; j <= steps; ++j) {
      const double x = lo + h * static_cast<double>(j);
      const double v = f(x + z) - f(x);
      acc += v * v;
    }
    return acc * h;
  };
  auto integrand = [&](double z) { return diff_energy(z) * std::pow(z, -1.0 - a); };
  // split at the width scale: below it D(z) ~ z^2, above it D(z) saturates
  const double z_mid = std::min(f.width(), z_far);
  const auto near = quad::tanh_sinh(integrand, 0.0, z_mid, 1e-12);
  const auto far = quad::kronrod(integrand, z_mid, z_far, 1e-12);
  const double body = near.value + far.value;
  if (!std::isfinite(body)) throw NumericalError("dirichlet_form_continuous: non-finite quadrature");
  const double tail = 2.0 * norm2 * std::pow(z_far, -a) / a;
  return 0.5 * (lc.c_plus + lc.c_minus) * (body + tail);
}

/// E_n(f) = (n^{a-1}/2) sum_{x,y} s(y - x) (f(y/n) - f(x/n))^2.
inline double dirichlet_form_discrete(const JumpKernel& kernel, const TestFunction& f, std::int64_t n) {
  detail::require(n >= 1, "dirichlet_form_discrete: n must be at least 1");
  const double nn = static_cast<double>(n);
  const auto x_lo = static_cast<Site>(std::floor((f.center() - f.support_radius()) * nn));
  const auto x_hi = static_cast<Site>(std::ceil((f.center() + f.support_radius()) * nn));
  const Site span = x_hi - x_lo + 1;
  if (span > (Site{1} << 24)) throw NumericalError("dirichlet_form_discrete: support window too large");
  std::vector<double> vals(static_cast<std::size_t>(span));
  double f2 = 0.0;
  for (Site i = 0; i < span; ++i) {
    vals[static_cast<std::size_t>(i)] = f(static_cast<double>(x_lo + i) / nn);
    f2 += vals[static_cast<std::size_t>(i)] * vals[static_cast<std::size_t>(i)];
  }
  auto at = [&](Site i) { return (i >= 0 && i < span) ? vals[static_cast<std::size_t>(i)] : 0.0; };
  double acc = 0.0;
  for (Site d = 1; d <= span; ++d) {
    double sd = 0.0;
    for (Site i = -d; i < span; ++i) {
      const double v = at(i + d) - at(i);
      sd += v * v;
    }
    acc += kernel.symmetric(d) * sd;
  }
  // beyond the window the shifted copies no longer overlap: S(d) = 2 sum f^2
  acc += f2 * kernel.tail_mass(span);
  return std::pow(nn, kernel.alpha() - 1.0) * acc;
}

}  // namespace lrex
