#pragma once

// Observables of the exclusion process: density fluctuation field in the
// moving frame, drift field A, quadratic variation, block averages, the
// mollified energy field, and the occupation time at a site.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "fft.hpp"
#include "kernel.hpp"
#include "simulator.hpp"
#include "test_function.hpp"

namespace lrex {

/// Everything a field evaluator needs besides the configuration.
struct FieldContext {
  JumpKernel kernel;
  std::shared_ptr<const RingKernel> ring;
  std::int64_t n = 1;
  double rho = 0.5;
  double velocity = 0.0;  // (1 - 2 rho) m_n: micro sites per unit macroscopic time

  FieldContext(const JumpKernel& k, std::shared_ptr<const RingKernel> r, std::int64_t n_, double rho_)
      : kernel(k), ring(std::move(r)), n(n_), rho(rho_) {
    detail::require(ring != nullptr, "FieldContext: missing ring kernel");
    detail::require(n >= 1, "FieldContext: n must be at least 1");
    detail::require(rho > 0.0 && rho < 1.0, "FieldContext: rho must lie in (0, 1)");
    velocity = (1.0 - 2.0 * rho) * centering_constant(kernel, n);
  }

  Site ring_size() const { return ring->ring_size(); }
  double time_scale() const { return std::pow(static_cast<double>(n), kernel.alpha()); }
  /// Lagrangian shift in micro sites at macroscopic time t.
  double shift(double t) const { return velocity * t; }
};

/// f((x - shift)/n) (or a derivative) on the unwrapped sites lo .. lo + size - 1.
struct Window {
  Site lo = 0;
  std::vector<double> values;

  Site size() const { return static_cast<Site>(values.size()); }
  Site hi() const { return lo + size() - 1; }
};

inline Window sample_window(const FieldContext& ctx, const TestFunction& f, double t, int order = 0) {
  const double nn = static_cast<double>(ctx.n);
  const double s = ctx.shift(t);
  const double r = f.support_radius();
  Window w;
  w.lo = static_cast<Site>(std::ceil(s + nn * (f.center() - r)));
  const auto hi = static_cast<Site>(std::floor(s + nn * (f.center() + r)));
  const Site width = hi - w.lo + 1;
  if (2 * width >= ctx.ring_size())
    throw InvalidArgument("field window of " + std::to_string(width) + " sites does not fit in half the ring (N = " +
                          std::to_string(ctx.ring_size()) + ")");
  w.values.resize(static_cast<std::size_t>(std::max<Site>(width, 0)));
  for (Site i = 0; i < width; ++i)
    w.values[static_cast<std::size_t>(i)] = f.derivative((static_cast<double>(w.lo + i) - s) / nn, order);
  return w;
}

namespace detail {

inline Site wrap(Site x, Site N) {
  x %= N;
  return x < 0 ? x + N : x;
}

/// Window values laid out on the ring (zero elsewhere).
inline std::vector<double> on_ring(const Window& w, Site N) {
  std::vector<double> out(static_cast<std::size_t>(N), 0.0);
  for (Site i = 0; i < w.size(); ++i) out[static_cast<std::size_t>(wrap(w.lo + i, N))] = w.values[static_cast<std::size_t>(i)];
  return out;
}

inline std::vector<double> occupancy_vector(const LatticeState& s) {
  return std::vector<double>(s.occupancy.begin(), s.occupancy.end());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace detail

/// Y_t^n(f) = n^{-1/2} sum_x (eta(x) - rho) f((x - shift)/n).
inline double fluctuation_field(const LatticeState& state, const FieldContext& ctx, const TestFunction& f, double t) {
  detail::require(state.ring_size == ctx.ring_size(), "fluctuation_field: ring size mismatch");
  const Window w = sample_window(ctx, f, t);
  double acc = 0.0;
  for (Site i = 0; i < w.size(); ++i) acc += state.centered(w.lo + i) * w.values[static_cast<std::size_t>(i)];
  return acc / std::sqrt(static_cast<double>(ctx.n));
}

/// Evaluates the field functionals of one test function; holds FFT buffers
/// and kernel spectra, so use one instance per thread.
///
/// A cutoff K < N/2 sums over |y - x| <= K with the kernel p on Z; K >= N/2
/// means every pair on the ring with the folded kernel q (evaluated by FFT).
class FieldEvaluator {
 public:
  FieldEvaluator(FieldContext ctx, TestFunction f, Site cutoff)
      : ctx_(std::move(ctx)), f_(f), N_(ctx_.ring_size()), conv_(static_cast<std::size_t>(N_)) {
    detail::require(cutoff >= 1, "FieldEvaluator: cutoff must be positive");
    K_ = std::min(cutoff, N_ / 2);
    const auto& q = ctx_.ring->folded_rates();
    // direct-sum weights p(d), a(d) for |d| <= K
    p_.assign(static_cast<std::size_t>(2 * K_ + 1), 0.0);
    a_.assign(static_cast<std::size_t>(2 * K_ + 1), 0.0);
    for (Site d = -K_; d <= K_; ++d) {
      if (d == 0) continue;
      p_[static_cast<std::size_t>(d + K_)] = ctx_.kernel(d);
      a_[static_cast<std::size_t>(d + K_)] = ctx_.kernel.antisymmetric(d);
    }
    std::vector<double> qs(static_cast<std::size_t>(N_)), qa(static_cast<std::size_t>(N_)),
        wr(static_cast<std::size_t>(N_));
    for (Site d = 1; d < N_; ++d) {
      const double fwd = q[static_cast<std::size_t>(d)];
      const double bwd = q[static_cast<std::size_t>(N_ - d)];
      qs[static_cast<std::size_t>(d)] = 0.5 * (fwd + bwd);
      qa[static_cast<std::size_t>(d)] = 0.5 * (fwd - bwd);
      wr[static_cast<std::size_t>(d)] = (1.0 - ctx_.rho) * fwd + ctx_.rho * bwd;
    }
    q_hat_ = conv_.transform(q);
    qs_hat_ = conv_.transform(qs);
    qa_hat_ = conv_.transform(qa);
    wr_hat_ = conv_.transform(wr);
  }

  const FieldContext& context() const { return ctx_; }
  const TestFunction& function() const { return f_; }
  Site cutoff() const { return K_; }
  bool full_range() const { return K_ >= N_ / 2; }

  double fluctuation(const LatticeState& s, double t) const { return fluctuation_field(s, ctx_, f_, t); }

  /// Integrand of A: n^{a - 1/2} sum_{0<|y-x|<=K} a(y - x) eta_bar(x) eta_bar(y) (g(y) - g(x)).
  double drift(const LatticeState& s, double t) {
    check(s);
    const Window w = sample_window(ctx_, f_, t);
    const double pref = std::pow(static_cast<double>(ctx_.n), ctx_.kernel.alpha() - 0.5);
    // antisymmetry folds the double sum into -2 sum_x g(x) eta_bar(x) (C_a eta_bar)(x)
    if (full_range()) {
      std::vector<double> eb(static_cast<std::size_t>(N_));
      for (Site x = 0; x < N_; ++x) eb[static_cast<std::size_t>(x)] = s.occupancy[static_cast<std::size_t>(x)] - ctx_.rho;
      const auto c = conv_.correlate(qa_hat_, eb);
      double acc = 0.0;
      for (Site i = 0; i < w.size(); ++i) {
        const auto x = static_cast<std::size_t>(detail::wrap(w.lo + i, N_));
        acc += w.values[static_cast<std::size_t>(i)] * eb[x] * c[x];
      }
      return -2.0 * pref * acc;
    }
    double acc = 0.0;
    for (Site i = 0; i < w.size(); ++i) {
      const double g = w.values[static_cast<std::size_t>(i)];
      if (g == 0.0) continue;
      const Site x = w.lo + i;
      const double ex = s.centered(x);
      double inner = 0.0;
      for (Site d = -K_; d <= K_; ++d) inner += a_[static_cast<std::size_t>(d + K_)] * s.centered(x + d);
      acc += g * ex * inner;
    }
    return -2.0 * pref * acc;
  }

  /// QV integrand: n^{a-1} sum_{|y-x|<=K} p(y - x) (eta(y) - eta(x))^2 (g(y) - g(x))^2.
  double qv(const LatticeState& s, double t) {
    check(s);
    const Window w = sample_window(ctx_, f_, t);
    const double pref = std::pow(static_cast<double>(ctx_.n), ctx_.kernel.alpha() - 1.0);
    if (full_range()) {
      // expand (eta_y - eta_x)^2 (g_y - g_x)^2 against the symmetrized folded kernel
      const auto g = detail::on_ring(w, N_);
      const auto eta = detail::occupancy_vector(s);
      std::vector<double> G(g.size()), eg(g.size()), eG(g.size());
      for (std::size_t x = 0; x < g.size(); ++x) {
        G[x] = g[x] * g[x];
        eg[x] = eta[x] * g[x];
        eG[x] = eta[x] * G[x];
      }
      const auto c_eta = conv_.correlate(qs_hat_, eta);
      const auto c_eg = conv_.correlate(qs_hat_, eg);
      double acc = 2.0 * ctx_.ring->q_star() * detail::dot(eta, G);
      acc += 2.0 * detail::dot(G, c_eta);
      acc -= 4.0 * detail::dot(g, c_eg);
      acc -= 4.0 * detail::dot(eG, c_eta);
      acc += 4.0 * detail::dot(eg, c_eg);
      return pref * std::max(acc, 0.0);
    }
    return pref * direct_pair_sum(s, w, [](double ex, double ey) { return (ey - ex) * (ey - ex); });
  }

  /// Predictable QV integrand: n^{a-1} sum p(y - x) eta(x) (1 - eta(y)) (g(y) - g(x))^2.
  double predictable_qv(const LatticeState& s, double t) {
    check(s);
    const Window w = sample_window(ctx_, f_, t);
    const double pref = std::pow(static_cast<double>(ctx_.n), ctx_.kernel.alpha() - 1.0);
    if (full_range()) {
      const auto g = detail::on_ring(w, N_);
      const auto eta = detail::occupancy_vector(s);
      std::vector<double> u(g.size()), uG(g.size()), ug(g.size());
      for (std::size_t x = 0; x < g.size(); ++x) {
        u[x] = 1.0 - eta[x];
        uG[x] = u[x] * g[x] * g[x];
        ug[x] = u[x] * g[x];
      }
      const auto c_uG = conv_.correlate(q_hat_, uG);
      const auto c_u = conv_.correlate(q_hat_, u);
      const auto c_ug = conv_.correlate(q_hat_, ug);
      double acc = 0.0;
      for (std::size_t x = 0; x < g.size(); ++x) {
        if (eta[x] == 0.0) continue;
        acc += c_uG[x] + g[x] * g[x] * c_u[x] - 2.0 * g[x] * c_ug[x];
      }
      return pref * std::max(acc, 0.0);
    }
    return pref * direct_pair_sum(s, w, [](double ex, double ey) { return ex * (1.0 - ey); });
  }

  /// Y_t(L^rho g) with the ring generator of the moving frame:
  /// n^{-1/2} sum_x eta_bar(x) [n^a ((C_w g)(x) - q* g(x)) - (v/n) f'((x - shift)/n)],
  /// w(d) = (1 - rho) q(d) + rho q(-d).
  double generator_field(const LatticeState& s, double t) {
    check(s);
    const Window w = sample_window(ctx_, f_, t);
    const Window dw = sample_window(ctx_, f_, t, 1);
    const auto g = detail::on_ring(w, N_);
    const auto cg = conv_.correlate(wr_hat_, g);
    const double scale = ctx_.time_scale();
    const double qstar = ctx_.ring->q_star();
    double acc = 0.0;
    for (Site x = 0; x < N_; ++x) {
      const auto i = static_cast<std::size_t>(x);
      acc += (s.occupancy[i] - ctx_.rho) * scale * (cg[i] - qstar * g[i]);
    }
    const double v = ctx_.velocity / static_cast<double>(ctx_.n);
    for (Site i = 0; i < dw.size(); ++i) acc -= s.centered(dw.lo + i) * v * dw.values[static_cast<std::size_t>(i)];
    return acc / std::sqrt(static_cast<double>(ctx_.n));
  }

  /// Change of the drift integrand when the occupation at z changes by delta,
  /// every other site held fixed: 2 delta n^{a-1/2} sum_d a(d) eta_bar(z+d) (g(z+d) - g(z)).
  /// `padded` holds g on sites base .. base + size - 1 (zero elsewhere) and must
  /// cover z +- K. The occupation at z + skip is read as shifted by `skip_correction`.
  double drift_jump(const LatticeState& s, std::span<const double> padded, Site base, Site z, double delta,
                    Site skip = 0, double skip_correction = 0.0) const {
    const double pref = std::pow(static_cast<double>(ctx_.n), ctx_.kernel.alpha() - 0.5);
    const Site off = detail::wrap(z - base, N_);
    detail::require(off >= K_ && off + K_ < static_cast<Site>(padded.size()), "drift_jump: site outside padded window");
    const double* g = padded.data() + off;
    const double* a = a_.data() + K_;
    const double gz = g[0];
    const double rho = ctx_.rho;
    double acc = 0.0;
    if (z - K_ >= 0 && z + K_ < N_) {
      const std::uint8_t* occ = s.occupancy.data() + z;
      for (Site d = -K_; d <= K_; ++d) acc += a[d] * (occ[d] - rho) * (g[d] - gz);
    } else {
      for (Site d = -K_; d <= K_; ++d) acc += a[d] * s.centered(z + d) * (g[d] - gz);
    }
    if (skip != 0) acc += a[skip] * skip_correction * (g[skip] - gz);
    return 2.0 * delta * pref * acc;
  }

  /// Value on the window, with sites taken modulo N and zero outside.
  double window_value(const Window& w, Site x) const {
    Site off = detail::wrap(x - w.lo, N_);
    return off < w.size() ? w.values[static_cast<std::size_t>(off)] : 0.0;
  }

 private:
  void check(const LatticeState& s) const {
    detail::require(s.ring_size == N_, "FieldEvaluator: ring size mismatch");
  }

  template <class Pair>
  double direct_pair_sum(const LatticeState& s, const Window& w, Pair pair) const {
    double acc = 0.0;
    for (Site x = w.lo - K_; x <= w.hi() + K_; ++x) {
      const double gx = window_value(w, x);
      const double ex = s.occupied(x) ? 1.0 : 0.0;
      for (Site d = -K_; d <= K_; ++d) {
        if (d == 0) continue;
        const double dg = window_value(w, x + d) - gx;
        if (dg == 0.0) continue;
        const double ey = s.occupied(x + d) ? 1.0 : 0.0;
        acc += p_[static_cast<std::size_t>(d + K_)] * pair(ex, ey) * dg * dg;
      }
    }
    return acc;
  }

  FieldContext ctx_;
  TestFunction f_;
  Site N_;
  Site K_ = 1;
  RingConvolver conv_;
  std::vector<double> p_, a_;
  RingConvolver::Spectrum q_hat_, qs_hat_, qa_hat_, wr_hat_;
};

inline double drift_field_increment(const LatticeState& state, const FieldContext& ctx, const TestFunction& f,
                                    double t, Site cutoff) {
  FieldEvaluator ev(ctx, f, cutoff);
  return ev.drift(state, t);
}

inline double qv_increment(const LatticeState& state, const FieldContext& ctx, const TestFunction& f, double t,
                           Site cutoff) {
  FieldEvaluator ev(ctx, f, cutoff);
  return ev.qv(state, t);
}

inline double predictable_qv_increment(const LatticeState& state, const FieldContext& ctx, const TestFunction& f,
                                       double t, Site cutoff) {
  FieldEvaluator ev(ctx, f, cutoff);
  return ev.predictable_qv(state, t);
}

// ---------------------------------------------------------------------------
// Time integrals on a mesh.

/// int_0^{t_k} of a sampled integrand by the trapezoid rule, cumulative.
inline std::vector<double> cumulative_trapezoid(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw MeshMismatch("cumulative_trapezoid: series lengths differ");
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t k = 1; k < times.size(); ++k)
    out[k] = out[k - 1] + 0.5 * (times[k] - times[k - 1]) * (values[k] + values[k - 1]);
  return out;
}

/// M_t = Y_t - Y_0 - int_0^t Y_s(L g) ds + A_t on a common mesh.
inline Series martingale_residual(const Series& y, const Series& generator_field, const Series& drift) {
  const auto same = [](const Series& a, const Series& b) {
    if (a.times.size() != b.times.size()) return false;
    for (std::size_t k = 0; k < a.times.size(); ++k)
      if (std::fabs(a.times[k] - b.times[k]) > 1e-12 * std::max(1.0, std::fabs(a.times[k]))) return false;
    return true;
  };
  if (!same(y, generator_field) || !same(y, drift))
    throw MeshMismatch("martingale_residual: Y, L-field and A series are not on a common mesh");
  if (y.times.empty()) throw MeshMismatch("martingale_residual: empty series");
  const auto integral = cumulative_trapezoid(generator_field.times, generator_field.values);
  Series m;
  m.observer_id = y.observer_id + ".M";
  m.times = y.times;
  m.values.resize(y.times.size());
  for (std::size_t k = 0; k < y.times.size(); ++k)
    m.values[k] = y.values[k] - y.values[0] - integral[k] + drift.values[k];
  return m;
}

// ---------------------------------------------------------------------------
// Block averages and the equivalence-of-ensembles function.

inline double block_average(const LatticeState& state, Site x, Site ell) {
  detail::require(ell >= 2 && ell <= state.ring_size, "block_average: need 2 <= l <= N");
  Site count = 0;
  for (Site i = 0; i < ell; ++i) count += state.occupied(x + i) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(ell);
}

/// psi as a function of the block count k in {0..l}.
inline double psi_from_count(Site k, Site ell, double rho) {
  detail::require(ell >= 2, "psi: l must be at least 2");
  detail::require(k >= 0 && k <= ell, "psi: block count out of range");
  const double l = static_cast<double>(ell);
  const double m = static_cast<double>(k) / l - rho;
  return l / (l - 1.0) * (m * m - rho * (1.0 - rho) / l) + (2.0 * rho - 1.0) / (l - 1.0) * m;
}

inline double psi_block(const LatticeState& state, Site x, Site ell, double rho) {
  const double avg = block_average(state, x, ell);
  return psi_from_count(static_cast<Site>(std::llround(avg * static_cast<double>(ell))), ell, rho);
}

/// E[psi^2] under Bernoulli(rho), exactly (binomial sum).
inline double psi_second_moment(Site ell, double rho) {
  detail::require(rho > 0.0 && rho < 1.0, "psi_second_moment: rho must lie in (0, 1)");
  double acc = 0.0;
  for (Site k = 0; k <= ell; ++k) {
    const double w = std::exp(std::lgamma(ell + 1.0) - std::lgamma(k + 1.0) - std::lgamma(ell - k + 1.0) +
                              k * std::log(rho) + (ell - k) * std::log1p(-rho));
    const double v = psi_from_count(k, ell, rho);
    acc += w * v * v;
  }
  return acc;
}

/// E[(psi - (eta^l - rho)^2 + rho(1-rho)/l)^2] under Bernoulli(rho), exactly.
inline double psi_remainder_moment(Site ell, double rho) {
  detail::require(rho > 0.0 && rho < 1.0, "psi_remainder_moment: rho must lie in (0, 1)");
  const double l = static_cast<double>(ell);
  double acc = 0.0;
  for (Site k = 0; k <= ell; ++k) {
    const double w = std::exp(std::lgamma(ell + 1.0) - std::lgamma(k + 1.0) - std::lgamma(ell - k + 1.0) +
                              k * std::log(rho) + (ell - k) * std::log1p(-rho));
    const double m = static_cast<double>(k) / l - rho;
    const double r = psi_from_count(k, ell, rho) - m * m + rho * (1.0 - rho) / l;
    acc += w * r * r;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Mollified energy field.

/// (1/n) sum_x [(1/(eps sqrt n)) sum_{i=1}^{eps n} eta_bar(x+i)]^2 f'((x - shift)/n).
inline double energy_integrand(const LatticeState& state, const FieldContext& ctx, const TestFunction& f, double eps,
                               double t) {
  detail::require(eps > 0.0 && eps < 1.0, "energy field: eps must lie in (0, 1)");
  const double nn = static_cast<double>(ctx.n);
  const auto m = static_cast<Site>(std::floor(eps * nn + 1e-9));
  if (m < 1) throw InvalidArgument("energy field: eps n must be at least 1");
  const Window dw = sample_window(ctx, f, t, 1);
  if (dw.size() == 0) return 0.0;
  // running block sum of eta_bar over x+1 .. x+m
  double block = 0.0;
  for (Site i = 1; i <= m; ++i) block += state.centered(dw.lo + i);
  const double norm = 1.0 / (eps * std::sqrt(nn));
  double acc = 0.0;
  for (Site i = 0; i < dw.size(); ++i) {
    const Site x = dw.lo + i;
    const double avg = block * norm;
    acc += avg * avg * dw.values[static_cast<std::size_t>(i)];
    block += state.centered(x + m + 1) - state.centered(x + 1);
  }
  return acc / nn;
}

/// int_s^t of the energy integrand by the trapezoid rule on the recorded mesh.
inline double energy_field(const Series& integrand, double s, double t) {
  detail::require(s <= t, "energy_field: need s <= t");
  if (s == t) return 0.0;
  const auto& ts = integrand.times;
  const auto tol = 1e-9 * std::max(1.0, std::fabs(t));
  auto find = [&](double v) -> std::size_t {
    for (std::size_t k = 0; k < ts.size(); ++k)
      if (std::fabs(ts[k] - v) <= tol) return k;
    throw MeshMismatch("energy_field: mesh does not contain t = " + std::to_string(v));
  };
  const std::size_t a = find(s), b = find(t);
  double acc = 0.0;
  for (std::size_t k = a; k < b; ++k)
    acc += 0.5 * (ts[k + 1] - ts[k]) * (integrand.values[k] + integrand.values[k + 1]);
  return acc;
}

// ---------------------------------------------------------------------------
// Static variance of the drift integrand.

/// n^{2a-1} sum_{x,y} a(y - x)^2 (f(y/n) - f(x/n))^2 on Z.
inline double afield_static_variance(const JumpKernel& kernel, const TestFunction& f, std::int64_t n) {
  detail::require(n >= 1, "afield_static_variance: n must be at least 1");
  const auto& par = kernel.params();
  if (par.symmetric()) return 0.0;
  const double nn = static_cast<double>(n);
  const auto x_lo = static_cast<Site>(std::floor((f.center() - f.support_radius()) * nn));
  const auto x_hi = static_cast<Site>(std::ceil((f.center() + f.support_radius()) * nn));
  const Site span = x_hi - x_lo + 1;
  if (span > (Site{1} << 20)) throw NumericalError("afield_static_variance: support window too large");
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
    const double a = kernel.antisymmetric(d);
    acc += 2.0 * a * a * sd;  // d and -d
  }
  // far pairs: the shifted copies are disjoint, S(d) = 2 sum f^2, and a(d)^2 = ((c+ - c-)/2)^2 d^{-2-2a}
  const double half = 0.5 * (par.c_plus - par.c_minus);
  acc += 2.0 * 2.0 * f2 * half * half * power_sum(2.0 + 2.0 * par.alpha, static_cast<double>(span + 1), 1.0, 0);
  return std::pow(nn, 2.0 * par.alpha - 1.0) * acc;
}

// ---------------------------------------------------------------------------
// Observers.

/// Samples Y_t(f) on the mesh.
class FluctuationObserver : public MeshObserver {
 public:
  FluctuationObserver(std::string id, double dt, FieldContext ctx, TestFunction f)
      : MeshObserver(std::move(id), dt), ctx_(std::move(ctx)), f_(f) {}
  double value(const LatticeState& s, double t) override { return fluctuation_field(s, ctx_, f_, t); }

 private:
  FieldContext ctx_;
  TestFunction f_;
};

/// Samples Y_t(L^rho g) on the mesh.
class GeneratorFieldObserver : public MeshObserver {
 public:
  GeneratorFieldObserver(std::string id, double dt, FieldContext ctx, TestFunction f)
      : MeshObserver(std::move(id), dt), ev_(std::move(ctx), f, 1) {}
  double value(const LatticeState& s, double t) override { return ev_.generator_field(s, t); }

 private:
  FieldEvaluator ev_;
};

/// Cumulative trapezoid integral of a field integrand on the mesh.
class IntegratingObserver : public MeshObserver {
 public:
  enum class Kind { drift, qv, predictable_qv, energy };

  IntegratingObserver(std::string id, double dt, FieldContext ctx, TestFunction f, Site cutoff, Kind kind,
                      double eps = 0.5)
      : MeshObserver(std::move(id), dt), ev_(std::move(ctx), f, cutoff), kind_(kind), eps_(eps) {}

  double value(const LatticeState& s, double t) override {
    const double v = integrand(s, t);
    if (started_) total_ += 0.5 * (t - last_t_) * (v + last_v_);
    started_ = true;
    last_t_ = t;
    last_v_ = v;
    return total_;
  }

  double integrand(const LatticeState& s, double t) {
    switch (kind_) {
      case Kind::drift: return ev_.drift(s, t);
      case Kind::qv: return ev_.qv(s, t);
      case Kind::predictable_qv: return ev_.predictable_qv(s, t);
      case Kind::energy: return energy_integrand(s, ev_.context(), ev_.function(), eps_, t);
    }
    return 0.0;
  }

 private:
  FieldEvaluator ev_;
  Kind kind_;
  double eps_;
  bool started_ = false;
  double last_t_ = 0.0;
  double last_v_ = 0.0;
  double total_ = 0.0;
};

/// A_t(f) integrated exactly between events. The test function must not move,
/// so this requires zero frame velocity.
class DriftEventObserver : public MeshObserver {
 public:
  DriftEventObserver(std::string id, double dt, FieldContext ctx, TestFunction f, Site cutoff)
      : MeshObserver(std::move(id), dt), ev_(ctx, f, cutoff) {
    detail::require(ctx.velocity == 0.0, "event-exact drift field needs zero frame velocity");
    const Window w = sample_window(ctx, f, 0.0);
    const Site K = ev_.cutoff();
    detail::require(w.size() + 4 * K < ctx.ring_size(), "event-exact drift field: window plus cutoff exceeds the ring");
    base_ = w.lo - 2 * K;
    padded_.assign(static_cast<std::size_t>(w.size() + 4 * K), 0.0);
    std::copy(w.values.begin(), w.values.end(), padded_.begin() + 2 * K);
  }

  bool wants_moves() const override { return true; }

  void begin(const LatticeState& s) override {
    current_ = ev_.drift(s, 0.0);
    last_t_ = s.micro_time / ev_.context().time_scale();
    total_ = 0.0;
  }

  void on_move(const LatticeState& s, Site from, Site to, double t) override {
    const bool near_from = near(from), near_to = near(to);
    if (!near_from && !near_to) return;
    total_ += current_ * (t - last_t_);
    last_t_ = t;
    const Site N = s.ring_size;
    // the removal at `from` happens while `to` is still empty
    Site d = detail::wrap(to - from, N);
    if (d > N / 2) d -= N;
    const bool close = std::abs(d) <= ev_.cutoff();
    double change = 0.0;
    if (near_from) change += ev_.drift_jump(s, padded_, base_, from, -1.0, close ? d : 0, -1.0);
    if (near_to) change += ev_.drift_jump(s, padded_, base_, to, 1.0);
    current_ += change;
  }

  double value(const LatticeState&, double t) override { return total_ + current_ * (t - last_t_); }

  double integrand() const { return current_; }

 private:
  bool near(Site z) const {
    const Site K = ev_.cutoff();
    const Site off = detail::wrap(z - base_, ev_.context().ring_size());
    return off >= K && off + K < static_cast<Site>(padded_.size());
  }

  FieldEvaluator ev_;
  std::vector<double> padded_;
  Site base_ = 0;
  double current_ = 0.0;
  double last_t_ = 0.0;
  double total_ = 0.0;
};

/// sqrt(n) int_0^t (eta_s(site) - rho) ds, integrated exactly between events.
class OccupationObserver : public MeshObserver {
 public:
  OccupationObserver(std::string id, double dt, std::int64_t n, double alpha, double rho, Site site = 0)
      : MeshObserver(std::move(id), dt), n_(n), alpha_(alpha), rho_(rho), site_(site) {}

  bool wants_moves() const override { return true; }

  void begin(const LatticeState& s) override {
    site_ = s.wrap(site_);
    state_ = s.occupied(site_) ? 1.0 : 0.0;
    last_t_ = s.micro_time / std::pow(static_cast<double>(n_), alpha_);
    total_ = 0.0;
  }

  void on_move(const LatticeState&, Site from, Site to, double t) override {
    if (from != site_ && to != site_) return;
    total_ += (state_ - rho_) * (t - last_t_);
    last_t_ = t;
    state_ = (to == site_) ? 1.0 : 0.0;
  }

  double value(const LatticeState&, double t) override {
    return std::sqrt(static_cast<double>(n_)) * (total_ + (state_ - rho_) * (t - last_t_));
  }

 private:
  std::int64_t n_;
  double alpha_;
  double rho_;
  Site site_;
  double state_ = 0.0;
  double last_t_ = 0.0;
  double total_ = 0.0;
};

/// psi_x^l at the block starting at the frame position of x = 0.
class PsiObserver : public MeshObserver {
 public:
  PsiObserver(std::string id, double dt, FieldContext ctx, Site ell)
      : MeshObserver(std::move(id), dt), ctx_(std::move(ctx)), ell_(ell) {}
  double value(const LatticeState& s, double t) override {
    return psi_block(s, static_cast<Site>(std::llround(ctx_.shift(t))), ell_, ctx_.rho);
  }

 private:
  FieldContext ctx_;
  Site ell_;
};

}  // namespace lrex
