#pragma once

// The scaled long-jump random walk and the stable law it converges to.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "symbol.hpp"

namespace lrex {

/// Exact sampler of P(k) proportional to k^{-s}, k >= 1 (Devroye's rejection method).
class ZetaSampler {
 public:
  explicit ZetaSampler(double s) : s_(s), b_(std::pow(2.0, s - 1.0)) {
    detail::require(s > 1.0, "ZetaSampler: exponent must exceed 1");
  }

  std::uint64_t operator()(Rng& rng) const {
    const double inv = -1.0 / (s_ - 1.0);
    for (;;) {
      const double x = std::floor(std::pow(rng.uniform_pos(), inv));
      if (!(x < 9.0e18)) continue;  // beyond int64: astronomically rare, resample
      const double t = std::pow(1.0 + 1.0 / x, s_ - 1.0);
      const double v = rng.uniform();
      if (v * x * (t - 1.0) / (b_ - 1.0) <= t / b_) return static_cast<std::uint64_t>(x);
    }
  }

 private:
  double s_;
  double b_;
};

/// Draws single jumps z with probability p(z)/p*.
///
/// |z| <= head comes from an alias table; the two tails |z| > head are drawn
/// exactly by rejection from the continuous Pareto envelope.
class JumpSampler {
 public:
  explicit JumpSampler(const JumpKernel& kernel, std::int64_t head = 4096) : head_(head) {
    detail::require(head >= 1, "JumpSampler: head must be positive");
    const auto& par = kernel.params();
    s_ = 1.0 + par.alpha;
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(2 * head + 2));
    for (std::int64_t z = -head; z <= head; ++z)
      if (z != 0) w.push_back(kernel(z));
    const double tail = power_sum(s_, static_cast<double>(head + 1), 1.0, 0);
    w.push_back(par.c_plus * tail);
    w.push_back(par.c_minus * tail);
    table_ = AliasTable(w);
    envelope_ = std::pow(1.0 + 1.0 / static_cast<double>(head + 1), s_);
  }

  std::int64_t operator()(Rng& rng) const {
    const auto idx = static_cast<std::int64_t>(table_.sample(rng));
    if (idx < head_) return idx - head_;
    if (idx < 2 * head_) return idx - head_ + 1;
    const std::int64_t k = tail(rng);
    return idx == 2 * head_ ? k : -k;
  }

 private:
  std::int64_t tail(Rng& rng) const {
    const double x0 = static_cast<double>(head_ + 1);
    for (;;) {
      // X with density proportional to x^{-s} on [x0, inf), k = floor(X)
      const double x = x0 * std::pow(rng.uniform_pos(), -1.0 / (s_ - 1.0));
      if (!(x < 9.0e18)) continue;
      const double k = std::floor(x);
      // accept with k^{-s} / int_k^{k+1} y^{-s} dy, scaled by its maximum
      const double cell = (std::pow(k, 1.0 - s_) - std::pow(k + 1.0, 1.0 - s_)) / (s_ - 1.0);
      if (rng.uniform() * envelope_ * cell <= std::pow(k, -s_)) return static_cast<std::int64_t>(k);
    }
  }

  std::int64_t head_;
  double s_ = 2.0;
  double envelope_ = 1.0;
  AliasTable table_;
};

/// One sample of x_t^n = (x(t n^a) - m_n t) / n for the walk started at 0.
inline double simulate_walk(const JumpKernel& kernel, const JumpSampler& sampler, std::int64_t n, double t,
                            Rng& rng) {
  detail::require(n >= 1, "simulate_walk: n must be at least 1");
  detail::require(t >= 0.0, "simulate_walk: t must be nonnegative");
  if (t == 0.0) return 0.0;
  const double nn = static_cast<double>(n);
  const double mean_jumps = kernel.total_rate() * t * std::pow(nn, kernel.alpha());
  std::poisson_distribution<std::int64_t> count(mean_jumps);
  const std::int64_t jumps = count(rng.engine());
  long double pos = 0.0L;
  for (std::int64_t j = 0; j < jumps; ++j) pos += static_cast<long double>(sampler(rng));
  return static_cast<double>((pos - static_cast<long double>(centering_constant(kernel, n) * t)) /
                             static_cast<long double>(nn));
}

inline double simulate_walk(const JumpKernel& kernel, std::int64_t n, double t, Rng& rng) {
  return simulate_walk(kernel, JumpSampler(kernel), n, t, rng);
}

inline std::vector<double> simulate_walks(const JumpKernel& kernel, std::int64_t n, double t, std::size_t count,
                                          std::uint64_t seed) {
  const JumpSampler sampler(kernel);
  std::vector<double> out(count);
  for (std::size_t r = 0; r < count; ++r) {
    Rng rng(replicate_seed(seed, r));
    out[r] = simulate_walk(kernel, sampler, n, t, rng);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Law of Z_t with characteristic function exp(t psi).

namespace detail {

inline double characteristic_cutoff(const StableSymbol& sym, double t) {
  // |e^{t psi(xi)}| < 1e-17 beyond this frequency
  const double re1 = -sym(1.0).real();
  return std::pow(40.0 / (t * re1), 1.0 / sym.alpha()) + 1.0;
}

template <class H>
double frequency_integral(H&& h, double xi_max, double x) {
  const double piece = std::fabs(x) > 1.0 ? std::numbers::pi / std::fabs(x) : 2.0;
  // the first piece holds the |xi|^a kink at 0 and at most half an oscillation
  const double first = std::min({1.0, piece, xi_max});
  double acc = quad::tanh_sinh(h, 0.0, first, 1e-13).value;
  double lo = first;
  while (lo < xi_max) {
    const double hi = std::min(lo + piece, xi_max);
    acc += quad::kronrod(h, lo, hi, 1e-11, 8).value;
    lo = hi;
  }
  return acc;
}

}  // namespace detail

/// P(Z_t <= x) by the Gil-Pelaez inversion formula.
inline double stable_cdf_at(const StableSymbol& sym, double t, double x) {
  detail::require(t > 0.0, "stable_cdf: t must be positive");
  const double xi_max = detail::characteristic_cutoff(sym, t);
  auto h = [&](double xi) {
    if (xi == 0.0) return 0.0;
    return (std::exp(cplx(0.0, -xi * x) + t * sym(xi))).imag() / xi;
  };
  return 0.5 - detail::frequency_integral(h, xi_max, x) / std::numbers::pi;
}

/// Density of Z_t at x.
inline double stable_density_at(const StableSymbol& sym, double t, double x) {
  detail::require(t > 0.0, "stable_density: t must be positive");
  const double xi_max = detail::characteristic_cutoff(sym, t);
  auto h = [&](double xi) { return (std::exp(cplx(0.0, -xi * x) + t * sym(xi))).real(); };
  return detail::frequency_integral(h, xi_max, x) / std::numbers::pi;
}

/// CDF of Z_t tabulated on [-X, X] with step h and linearly interpolated.
/// Beyond the table each tail is A |x|^{-a} + B |x|^{-2a} with A = t c / a from
/// the Levy measure and B matched at the edge; direct inversion out there needs
/// thousands of pieces.
class StableCdf {
 public:
  StableCdf(const StableSymbol& sym, double t, double half_width = 40.0, double step = 0.01)
      : sym_(sym), t_(t), x0_(-half_width), h_(step) {
    detail::require(t > 0.0, "stable_cdf: t must be positive");
    detail::require(half_width > 0.0 && step > 0.0, "stable_cdf: bad table");
    const auto m = static_cast<std::size_t>(std::llround(2.0 * half_width / step)) + 1;
    cdf_.resize(m);
    density_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const double x = x0_ + h_ * static_cast<double>(j);
      cdf_[j] = stable_cdf_at(sym, t, x);
      density_[j] = stable_density_at(sym, t, x);
    }
    // mass: left tail + Simpson over the table + right tail
    double simpson = 0.0;
    const std::size_t intervals = (m - 1) / 2 * 2;
    for (std::size_t j = 0; j + 2 <= intervals; j += 2)
      simpson += h_ / 3.0 * (density_[j] + 4.0 * density_[j + 1] + density_[j + 2]);
    mass_ = cdf_.front() + simpson + (1.0 - cdf_[intervals]);
    for (std::size_t j = 1; j < m; ++j)
      if (cdf_[j] < cdf_[j - 1] - 1e-9) throw NumericalError("stable_cdf: table not monotone");
    if (std::fabs(mass_ - 1.0) > 1e-6)
      throw NumericalError("stable_cdf: density mass deviates from 1 by " + std::to_string(mass_ - 1.0));
    const auto& lc = sym.coefficients();
    left_ = fit_tail(t * lc.c_minus / lc.alpha, half_width, cdf_.front());
    right_ = fit_tail(t * lc.c_plus / lc.alpha, half_width, 1.0 - cdf_.back());
  }

  double operator()(double x) const {
    const double u = (x - x0_) / h_;
    if (u < 0.0) return std::clamp(tail(left_, -x), 0.0, 1.0);
    if (u > static_cast<double>(cdf_.size() - 1)) return std::clamp(1.0 - tail(right_, x), 0.0, 1.0);
    const auto j = std::min(static_cast<std::size_t>(u), cdf_.size() - 2);
    const double w = u - static_cast<double>(j);
    return std::clamp((1.0 - w) * cdf_[j] + w * cdf_[j + 1], 0.0, 1.0);
  }

  double density(double x) const {
    const double u = (x - x0_) / h_;
    if (u < 0.0 || u > static_cast<double>(density_.size() - 1)) return stable_density_at(sym_, t_, x);
    const auto j = std::min(static_cast<std::size_t>(u), density_.size() - 2);
    const double w = u - static_cast<double>(j);
    return (1.0 - w) * density_[j] + w * density_[j + 1];
  }

  /// Inverse by bisection on the table (used to draw null samples).
  double quantile(double p) const {
    double lo = x0_, hi = -x0_;
    while ((*this)(lo) > p) lo *= 2.0;
    while ((*this)(hi) < p) hi *= 2.0;
    for (int k = 0; k < 80; ++k) {
      const double mid = 0.5 * (lo + hi);
      ((*this)(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }

  double mass() const { return mass_; }

 private:
  struct Tail {
    double a = 0.0;
    double b = 0.0;
  };

  Tail fit_tail(double a, double x, double s) const {
    const double u = std::pow(x, -sym_.alpha());
    return {a, (s - a * u) / (u * u)};
  }

  double tail(const Tail& c, double x) const {
    const double u = std::pow(x, -sym_.alpha());
    return c.a * u + c.b * u * u;
  }

  StableSymbol sym_;
  double t_;
  double x0_;
  double h_;
  std::vector<double> cdf_;
  std::vector<double> density_;
  double mass_ = 1.0;
  Tail left_, right_;
};

inline std::vector<double> stable_cdf(const StableSymbol& sym, double t, std::span<const double> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) out.push_back(std::clamp(stable_cdf_at(sym, t, x), 0.0, 1.0));
  for (std::size_t j = 1; j < out.size(); ++j)
    if (xs[j] >= xs[j - 1] && out[j] < out[j - 1] - 1e-9) throw NumericalError("stable_cdf: not monotone");
  return out;
}

/// One-sample KS with an additive lattice allowance subtracted from the statistic.
inline StatReport ks_test(std::span<const double> samples, const std::function<double(double)>& cdf,
                          double allowance = 0.0, double level = 0.01) {
  detail::require(samples.size() >= 100, "ks_test: need at least 100 samples");
  StatReport r;
  r.name = "ks_test";
  r.statistic = ks_statistic(samples, cdf);
  const double adjusted = std::max(0.0, r.statistic - allowance);
  const double p = ks_pvalue(adjusted, static_cast<double>(samples.size()));
  r.threshold = level;
  r.pass = p > level;
  r.extras = {{"p_value", p}, {"allowance", allowance}, {"adjusted_statistic", adjusted}};
  return r;
}

}  // namespace lrex
