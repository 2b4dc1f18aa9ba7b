#pragma once

// Characteristic exponent psi of the stable generator and the Fourier-side
// oracles built on it: semigroup, OU covariance, martingale QV.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "levy.hpp"
#include "series.hpp"
#include "quadrature.hpp"
#include "test_function.hpp"

namespace lrex {

using cplx = std::complex<double>;

namespace detail {

/// int_A^inf e^{i y} y^{-beta} dy for large A by repeated integration by parts.
inline cplx oscillatory_tail(double beta, double A) {
  const cplx i(0.0, 1.0);
  cplx sum = 0.0;
  cplx ipow = i;  // i^{k+1}
  double poch = 1.0;  // (beta)_k
  double apow = std::pow(A, -beta);
  for (int k = 0; k < 40; ++k) {
    const cplx term = poch * apow / ipow;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    poch *= beta + k;
    apow /= A;
    ipow *= i;
  }
  return -std::exp(i * A) * sum;
}

/// One-sided integral I(w) = int_0^inf y^{-1-a} (e^{i w y} - 1 - i w theta(y)) dy, w > 0.
inline cplx one_sided_exponent(double a, double w) {
  // inner part on [0, 1]
  auto re_in = [&](double y) {
    const double s = std::sin(0.5 * w * y);
    return -2.0 * s * s * std::pow(y, -1.0 - a);
  };
  auto im_in = [&](double y) {
    const double u = w * y;
    double v;
    if (a < 1.0) {
      v = std::sin(u);
    } else if (u < 1e-2) {
      const double u2 = u * u;
      v = -u * u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0)));
    } else {
      v = std::sin(u) - u;
    }
    return v * std::pow(y, -1.0 - a);
  };
  double re = quad::tanh_sinh(re_in, 0.0, 1.0, 1e-14).value;
  double im = quad::tanh_sinh(im_in, 0.0, 1.0, 1e-14).value;

  // outer part on [1, inf): int e^{iwy} y^{-1-a} - int y^{-1-a} - compensation
  const double period = 2.0 * std::numbers::pi / w;
  const double A = 1.0 + period * std::ceil(std::max(400.0 / w, 4.0 * period) / period);
  cplx osc = 0.0;
  double lo = 1.0;
  while (lo < A) {
    const double hi = std::min(lo + period, A);
    osc += cplx(quad::kronrod([&](double y) { return std::cos(w * y) * std::pow(y, -1.0 - a); }, lo, hi, 1e-14).value,
                quad::kronrod([&](double y) { return std::sin(w * y) * std::pow(y, -1.0 - a); }, lo, hi, 1e-14).value);
    lo = hi;
  }
  // substitute u = w y in the tail
  osc += std::pow(w, a) * oscillatory_tail(1.0 + a, w * A);
  re += osc.real() - 1.0 / a;
  im += osc.imag();
  if (a > 1.0) im -= w / (a - 1.0);
  return {re, im};
}

}  // namespace detail

/// psi(xi) by direct quadrature at this xi (no scaling relation used).
inline cplx characteristic_exponent_direct(const LevyCoefficients& lc, double xi) {
  lc.validate();
  if (xi == 0.0) return 0.0;
  const cplx one = detail::one_sided_exponent(lc.alpha, std::fabs(xi));
  const cplx v = lc.c_plus * one + lc.c_minus * std::conj(one);
  return xi > 0.0 ? v : std::conj(v);
}

/// Characteristic exponent psi(xi) = int c(y)|y|^{-1-a}(e^{i xi y} - 1 - i xi theta(y)) dy.
///
/// psi(+-1) come from quadrature; other frequencies follow from the exact
/// dilation psi(xi) = |xi|^a psi(sgn xi), with the extra -i xi (c+ - c-) ln|xi|
/// produced by the truncated compensation when a = 1.
class StableSymbol {
 public:
  StableSymbol() = default;

  explicit StableSymbol(const LevyCoefficients& lc) : lc_(lc) {
    lc.validate();
    unit_ = characteristic_exponent_direct(lc, 1.0);
    if (unit_.real() > 1e-10) throw NumericalError("symbol: Re psi > 0");
  }

  const LevyCoefficients& coefficients() const { return lc_; }
  double alpha() const { return lc_.alpha; }

  cplx operator()(double xi) const {
    if (xi == 0.0) return 0.0;
    const double m = std::fabs(xi);
    const cplx base = xi > 0.0 ? unit_ : std::conj(unit_);
    if (lc_.alpha == 1.0) return m * base - cplx(0.0, xi * (lc_.c_plus - lc_.c_minus) * std::log(m));
    return std::pow(m, lc_.alpha) * base;
  }

  /// Values on the FFT frequencies xi_k = pi k / L of a grid with M points on [-L, L).
  std::vector<cplx> table(double L, std::size_t M) const {
    std::vector<cplx> out(M);
    for (std::size_t k = 0; k < M; ++k) out[k] = (*this)(grid_frequency(L, M, k));
    return out;
  }

  static double grid_frequency(double L, std::size_t M, std::size_t k) {
    const auto kk = static_cast<double>(k < M / 2 ? static_cast<std::ptrdiff_t>(k)
                                                  : static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(M));
    return std::numbers::pi * kk / L;
  }

 private:
  LevyCoefficients lc_{};
  cplx unit_ = 0.0;
};

inline StableSymbol symbol(const LevyCoefficients& lc) { return StableSymbol(lc); }

// ---------------------------------------------------------------------------
// Integrals over frequency on the half line.

namespace detail {

/// (1/pi) int_0^inf h(xi) dxi for h smooth away from 0, decaying like f^.
template <class H>
double half_line_frequency_integral(H&& h, double xi_max, double piece) {
  const double first = std::min({1.0, piece, xi_max});
  double acc = quad::tanh_sinh(h, 0.0, first, 1e-13).value;
  double lo = first;
  while (lo < xi_max) {
    const double hi = std::min(lo + piece, xi_max);
    acc += quad::kronrod(h, lo, hi, 1e-13).value;
    lo = hi;
  }
  return acc / std::numbers::pi;
}

inline double oscillation_piece(double x) { return std::fabs(x) > 1.0 ? std::numbers::pi / std::fabs(x) : 4.0; }

}  // namespace detail

/// L f(x) by Fourier inversion of psi f^.
inline double fourier_generator_at(const StableSymbol& sym, const TestFunction& f, double x) {
  auto h = [&](double xi) { return (sym(xi) * f.fourier(xi) * std::exp(cplx(0.0, xi * x))).real(); };
  return detail::half_line_frequency_integral(h, f.frequency_cutoff(),
                                              detail::oscillation_piece(std::fabs(x) + std::fabs(f.center())));
}

/// <f, -S f> = (1/2pi) int |f^|^2 (-Re psi).
inline double dirichlet_form_fourier(const StableSymbol& sym, const TestFunction& f) {
  auto h = [&](double xi) { return std::norm(f.fourier(xi)) * -sym(xi).real(); };
  return detail::half_line_frequency_integral(h, f.frequency_cutoff(), 4.0);
}

/// (P_t f)(x) on the line.
inline double semigroup_at(const StableSymbol& sym, double t, const TestFunction& f, double x) {
  detail::require(t >= 0.0, "semigroup: t must be nonnegative");
  auto h = [&](double xi) { return (std::exp(t * sym(xi)) * f.fourier(xi) * std::exp(cplx(0.0, xi * x))).real(); };
  return detail::half_line_frequency_integral(h, f.frequency_cutoff(),
                                              detail::oscillation_piece(std::fabs(x) + std::fabs(f.center())));
}

/// chi <P_t f, g> by Parseval on the line.
inline double ou_covariance(const StableSymbol& sym, double chi, double t, const TestFunction& f,
                            const TestFunction& g) {
  detail::require(t >= 0.0, "ou_covariance: t must be nonnegative");
  detail::require(chi > 0.0, "ou_covariance: chi must be positive");
  auto h = [&](double xi) { return (std::exp(t * sym(xi)) * f.fourier(xi) * std::conj(g.fourier(xi))).real(); };
  const double xi_max = std::min(f.frequency_cutoff(), g.frequency_cutoff());
  return chi * detail::half_line_frequency_integral(
                   h, xi_max, detail::oscillation_piece(std::fabs(f.center() - g.center())));
}

/// chi (||f||^2 - ||P_t f||^2).
inline double ou_martingale_qv(const StableSymbol& sym, double chi, double t, const TestFunction& f) {
  detail::require(t >= 0.0, "ou_martingale_qv: t must be nonnegative");
  auto h = [&](double xi) { return -std::norm(f.fourier(xi)) * std::expm1(2.0 * t * sym(xi).real()); };
  return chi * detail::half_line_frequency_integral(h, f.frequency_cutoff(), 4.0);
}

// ---------------------------------------------------------------------------
// Periodic grid route (FFT).

struct SpatialGrid {
  double L = 64.0;
  std::size_t M = std::size_t{1} << 16;

  double dx() const { return 2.0 * L / static_cast<double>(M); }
  double point(std::size_t j) const { return -L + dx() * static_cast<double>(j); }
};

/// P_t f sampled on the grid points of `grid`.
///
/// Signals aliasing when |P_t f| at the grid edge exceeds `edge_tol` times the
/// peak; heavy stable tails make the default deliberately loose.
inline std::vector<double> semigroup_apply(const StableSymbol& sym, double t, const TestFunction& f,
                                           const SpatialGrid& grid = {}, double edge_tol = 1e-3) {
  detail::require(t >= 0.0, "semigroup_apply: t must be nonnegative");
  detail::require(grid.M >= 16 && grid.M % 2 == 0 && grid.L > 0.0, "semigroup_apply: bad grid");
  detail::require(f.support_radius() + std::fabs(f.center()) < grid.L, "semigroup_apply: f does not fit in the grid");
  const std::size_t M = grid.M;
  auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * M));
  fftw_plan fwd, bwd;
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fwd = fftw_plan_dft_1d(static_cast<int>(M), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(static_cast<int>(M), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (std::size_t j = 0; j < M; ++j) {
    buf[j][0] = f(grid.point(j));
    buf[j][1] = 0.0;
  }
  fftw_execute(fwd);
  for (std::size_t k = 0; k < M; ++k) {
    const cplx m = std::exp(t * sym(StableSymbol::grid_frequency(grid.L, M, k)));
    const cplx v = cplx(buf[k][0], buf[k][1]) * m / static_cast<double>(M);
    buf[k][0] = v.real();
    buf[k][1] = v.imag();
  }
  fftw_execute(bwd);
  std::vector<double> out(M);
  double peak = 0.0;
  double imag_max = 0.0;
  for (std::size_t j = 0; j < M; ++j) {
    out[j] = buf[j][0];
    peak = std::max(peak, std::fabs(out[j]));
    imag_max = std::max(imag_max, std::fabs(buf[j][1]));
  }
  {
    std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(buf);
  if (imag_max > 1e-9 * std::max(peak, 1e-300)) throw NumericalError("semigroup_apply: imaginary residual");
  const double edge = std::max(std::fabs(out.front()), std::fabs(out.back()));
  if (peak > 0.0 && edge > edge_tol * peak)
    throw NumericalError("semigroup_apply: aliasing, edge/peak = " + std::to_string(edge / peak));
  return out;
}

/// chi <P_t f, g> from the grid route; cross-check for ou_covariance.
inline double ou_covariance_grid(const StableSymbol& sym, double chi, double t, const TestFunction& f,
                                 const TestFunction& g, const SpatialGrid& grid = {}, double edge_tol = 1e-3) {
  const auto pf = semigroup_apply(sym, t, f, grid, edge_tol);
  double acc = 0.0;
  for (std::size_t j = 0; j < grid.M; ++j) acc += pf[j] * g(grid.point(j));
  return chi * acc * grid.dx();
}

/// Leading-order excess of the grid route over the line: far images of P_t f
/// seen through the power-law tails of the stable density, for f and g
/// concentrated near their centers.
inline double periodic_image_correction(const StableSymbol& sym, double chi, double t, const TestFunction& f,
                                        const TestFunction& g, const SpatialGrid& grid = {}) {
  const auto& lc = sym.coefficients();
  const double P = 2.0 * grid.L, d = g.center() - f.center(), s = 1.0 + lc.alpha;
  double mf = 0.0, mg = 0.0;
  for (std::size_t j = 0; j < grid.M; ++j) {
    mf += f(grid.point(j));
    mg += g(grid.point(j));
  }
  mf *= grid.dx();
  mg *= grid.dx();
  const double images = lc.c_minus * power_sum(s, d, P, 1) + lc.c_plus * power_sum(s, -d, P, 1);
  return chi * t * mf * mg * images;
}

}  // namespace lrex
