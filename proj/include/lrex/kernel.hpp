#pragma once

// Long-jump transition rates p(z) = c(z) / |z|^(1+alpha), their
// symmetric/antisymmetric parts, centering constants and the periodized
// sampler used by the ring simulator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "random.hpp"
#include "series.hpp"

namespace lrex {

using Site = std::int64_t;

struct KernelParams {
  double alpha = 1.5;
  double c_plus = 1.0;
  double c_minus = 1.0;
  /// Amplitude of the nearest-neighbour term lambda * n^(3/2 - alpha) at z = 1.
  double weak_lambda = 0.0;
  /// Scaling parameter entering the weak term only.
  std::int64_t scale_n = 1;

  void validate() const {
    detail::require(alpha > 0.0 && alpha < 2.0, "kernel: alpha must lie in (0, 2)");
    detail::require(c_plus >= 0.0 && c_minus >= 0.0, "kernel: amplitudes must be nonnegative");
    detail::require(c_plus + c_minus > 0.0, "kernel: c_plus + c_minus must be positive");
    detail::require(weak_lambda >= 0.0, "kernel: weak_lambda must be nonnegative");
    detail::require(scale_n >= 1, "kernel: n must be at least 1");
  }

  /// Extra rate carried by the z = 1 jump.
  double weak_rate() const {
    if (weak_lambda == 0.0) return 0.0;
    return weak_lambda * std::pow(static_cast<double>(scale_n), 1.5 - alpha);
  }

  bool symmetric() const { return c_plus == c_minus && weak_lambda == 0.0; }
};

inline double rate(const KernelParams& params, Site z) {
  if (z == 0) return 0.0;
  const double mag = std::pow(std::fabs(static_cast<double>(z)), -1.0 - params.alpha);
  double p = (z > 0 ? params.c_plus : params.c_minus) * mag;
  if (z == 1) p += params.weak_rate();
  return p;
}

struct RateParts {
  double symmetric;
  double antisymmetric;
};

inline RateParts decompose(const KernelParams& params, Site z) {
  const double fwd = rate(params, z);
  const double bwd = rate(params, -z);
  return {0.5 * (fwd + bwd), 0.5 * (fwd - bwd)};
}

/// Validated kernel together with the constants derived from it.
class JumpKernel {
 public:
  explicit JumpKernel(const KernelParams& params) : params_(params) {
    params_.validate();
    const double s = 1.0 + params_.alpha;
    p_star_ = (params_.c_plus + params_.c_minus) * zeta(s) + params_.weak_rate();
    if (params_.alpha > 1.0) {
      first_moment_ = (params_.c_plus - params_.c_minus) * zeta(params_.alpha) + params_.weak_rate();
    }
  }

  const KernelParams& params() const { return params_; }
  double alpha() const { return params_.alpha; }

  double operator()(Site z) const { return rate(params_, z); }
  double symmetric(Site z) const { return decompose(params_, z).symmetric; }
  double antisymmetric(Site z) const { return decompose(params_, z).antisymmetric; }

  /// p* = sum_z p(z).
  double total_rate() const { return p_star_; }

  /// Sum over |z| > d of p(z).
  double tail_mass(Site d) const {
    detail::require(d >= 0, "tail_mass: negative cutoff");
    const double s = 1.0 + params_.alpha;
    double mass = (params_.c_plus + params_.c_minus) * power_sum(s, static_cast<double>(d), 1.0, 1);
    if (d == 0) mass += params_.weak_rate();
    return mass;
  }

  /// sum_x x p(x), defined for alpha > 1.
  std::optional<double> first_moment() const { return first_moment_; }

  /// m = sum_{y > 0} y a(y); empty when alpha <= 1.
  std::optional<double> mean_drift_m() const {
    if (!first_moment_) return std::nullopt;
    return 0.5 * *first_moment_;
  }

 private:
  KernelParams params_;
  double p_star_ = 0.0;
  std::optional<double> first_moment_;
};

/// m_n^alpha: 0 for alpha < 1, n sum_{|x|<=n} x p(x) for alpha = 1 and
/// n^alpha sum_x x p(x) for alpha > 1.
inline double centering_constant(const JumpKernel& kernel, std::int64_t n) {
  detail::require(n >= 1, "centering_constant: n must be at least 1");
  const auto& par = kernel.params();
  const double nn = static_cast<double>(n);
  if (par.alpha < 1.0) return 0.0;
  if (par.alpha == 1.0) {
    const double harmonic = partial_power_sum(1.0, n);
    return nn * ((par.c_plus - par.c_minus) * harmonic + par.weak_rate());
  }
  return std::pow(nn, par.alpha) * *kernel.first_moment();
}

inline double mean_drift(const JumpKernel& kernel) {
  const auto m = kernel.mean_drift_m();
  if (!m) throw InvalidRegime("mean_drift: the mean sum diverges for alpha <= 1");
  return *m;
}

/// Walker/Vose alias table over a finite set of weights.
class AliasTable {
 public:
  AliasTable() = default;

  explicit AliasTable(std::span<const double> weights) {
    const std::size_t k = weights.size();
    detail::require(k > 0 && k <= (std::size_t{1} << 32), "AliasTable: bad table size");
    double total = 0.0;
    for (double w : weights) {
      detail::require(w >= 0.0 && std::isfinite(w), "AliasTable: weights must be finite and >= 0");
      total += w;
    }
    detail::require(total > 0.0, "AliasTable: weights sum to zero");

    prob_.resize(k);
    threshold_.resize(k);
    alias_.resize(k);
    std::vector<double> scaled(k);
    std::vector<std::uint32_t> small, large;
    small.reserve(k);
    large.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      prob_[i] = weights[i] / total;
      scaled[i] = prob_[i] * static_cast<double>(k);
      (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
    }
    std::vector<double> keep(k, 1.0);
    for (std::size_t i = 0; i < k; ++i) alias_[i] = static_cast<std::uint32_t>(i);
    while (!small.empty() && !large.empty()) {
      const auto lo = small.back();
      small.pop_back();
      const auto hi = large.back();
      keep[lo] = scaled[lo];
      alias_[lo] = hi;
      scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0;
      if (scaled[hi] < 1.0) {
        large.pop_back();
        small.push_back(hi);
      }
    }
    // leftovers are full columns up to rounding
    for (std::size_t i = 0; i < k; ++i) {
      const double t = std::ldexp(keep[i], 32);
      threshold_[i] = t >= 0x1.0p32 ? UINT64_C(1) << 32 : static_cast<std::uint64_t>(t);
    }
  }

  std::size_t size() const { return prob_.size(); }
  double probability(std::size_t i) const { return prob_[i]; }

  /// One 64-bit draw: the high half picks the column, the low half decides
  /// between the column and its alias (resolution 2^-32).
  std::size_t sample(Rng& rng) const {
    const std::uint64_t u = rng();
    const std::size_t col = static_cast<std::size_t>(((u >> 32) * prob_.size()) >> 32);
    return (u & 0xffffffffu) < threshold_[col] ? col : alias_[col];
  }

 private:
  std::vector<double> prob_;
  std::vector<std::uint64_t> threshold_;
  std::vector<std::uint32_t> alias_;
};

/// The kernel periodized onto a ring of N sites.
class RingKernel {
 public:
  RingKernel(const JumpKernel& kernel, Site ring_size, double tolerance = 1e-10)
      : ring_size_(ring_size) {
    detail::require(ring_size >= 4 && ring_size % 2 == 0, "fold_to_ring: N must be even and >= 4");
    detail::require(ring_size <= (Site{1} << 31), "fold_to_ring: N too large");
    const auto& par = kernel.params();
    const double s = 1.0 + par.alpha;
    const double nn = static_cast<double>(ring_size);
    folded_.assign(static_cast<std::size_t>(ring_size), 0.0);
    for (Site d = 1; d < ring_size; ++d) {
      const double dd = static_cast<double>(d);
      double q = 0.0;
      if (par.c_plus > 0.0) q += par.c_plus * power_sum(s, dd, nn, 0, 64);
      if (par.c_minus > 0.0) q += par.c_minus * power_sum(s, -dd, nn, 1, 64);
      folded_[static_cast<std::size_t>(d)] = q;
    }
    folded_[1] += par.weak_rate();
    // add in increasing order of size to limit rounding
    std::vector<double> sorted(folded_.begin() + 1, folded_.end());
    std::sort(sorted.begin(), sorted.end());
    q_star_ = 0.0;
    for (double q : sorted) q_star_ += q;
    // jumps by multiples of N return to their origin and are dropped
    const double self_mass = (par.c_plus + par.c_minus) * zeta(s) * std::pow(nn, -s);
    const double rel = std::fabs(q_star_ + self_mass - kernel.total_rate()) / kernel.total_rate();
    if (!(rel < tolerance))
      throw NumericalError("fold_to_ring: folded mass deviates from p* by " + std::to_string(rel));
    sampler_ = AliasTable(std::span<const double>(folded_).subspan(1));
  }

  Site ring_size() const { return ring_size_; }
  /// q(d) for d in 1..N-1; q(0) = 0.
  double folded_rate(Site d) const {
    d %= ring_size_;
    if (d < 0) d += ring_size_;
    return folded_[static_cast<std::size_t>(d)];
  }
  std::span<const double> folded_rates() const { return folded_; }
  double q_star() const { return q_star_; }
  const AliasTable& sampler() const { return sampler_; }

  Site sample_displacement(Rng& rng) const { return static_cast<Site>(sampler_.sample(rng)) + 1; }

 private:
  Site ring_size_;
  std::vector<double> folded_;
  double q_star_ = 0.0;
  AliasTable sampler_;
};

inline RingKernel fold_to_ring(const JumpKernel& kernel, Site ring_size) { return RingKernel(kernel, ring_size); }

inline Site sample_displacement(const RingKernel& ring, Rng& rng) { return ring.sample_displacement(rng); }

}  // namespace lrex
