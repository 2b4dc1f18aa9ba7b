#pragma once

// Spectral gap of the symmetrized long-jump walk restricted to {1, ..., l}.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "stats.hpp"

namespace lrex {

/// Generator of the walk on {1..l} with rates s(y - x); jumps leaving the
/// interval are suppressed, diagonal = -row sum.
class IntervalGenerator {
 public:
  IntervalGenerator(const JumpKernel& kernel, int ell) : ell_(ell) {
    detail::require(ell >= 2 && ell <= 4096, "IntervalGenerator: l must lie in [2, 4096]");
    std::vector<double> s(static_cast<std::size_t>(ell));
    for (int d = 1; d < ell; ++d) s[static_cast<std::size_t>(d)] = kernel.symmetric(d);
    g_.setZero(ell, ell);
    for (int x = 0; x < ell; ++x) {
      double row = 0.0;
      for (int y = 0; y < ell; ++y) {
        if (x == y) continue;
        const double r = s[static_cast<std::size_t>(std::abs(y - x))];
        g_(x, y) = r;
        row += r;
      }
      g_(x, x) = -row;
    }
  }

  int length() const { return ell_; }
  const Eigen::MatrixXd& matrix() const { return g_; }

 private:
  int ell_;
  Eigen::MatrixXd g_;
};

/// Eigenvalues of -G in increasing order.
inline Eigen::VectorXd interval_spectrum(const IntervalGenerator& gen) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(-gen.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("spectral_gap: eigensolver failed");
  return solver.eigenvalues();
}

/// Smallest nonzero eigenvalue of -G.
inline double spectral_gap(const IntervalGenerator& gen) {
  const auto ev = interval_spectrum(gen);
  const double gap = ev(1);
  if (gap < 1e-12) throw NumericalError("spectral_gap: second eigenvalue numerically zero");
  return gap;
}

struct GapRow {
  int ell;
  double lambda;
  double scaled;  // lambda * l^alpha
};

struct GapScalingReport {
  std::vector<GapRow> rows;
  double slope = 0.0;
  double band = 0.0;  // max / min of lambda * l^alpha
};

inline GapScalingReport gap_scaling_report(const JumpKernel& kernel, std::span<const int> ells) {
  detail::require(!ells.empty(), "gap_scaling_report: empty list");
  detail::require(std::is_sorted(ells.begin(), ells.end()), "gap_scaling_report: list must be sorted");
  detail::require(ells.back() <= 4096, "gap_scaling_report: l above 4096");
  GapScalingReport rep;
  std::vector<double> lx, ly;
  for (int ell : ells) {
    const double lam = spectral_gap(IntervalGenerator(kernel, ell));
    const double sc = lam * std::pow(static_cast<double>(ell), kernel.alpha());
    rep.rows.push_back({ell, lam, sc});
    lx.push_back(std::log(static_cast<double>(ell)));
    ly.push_back(std::log(lam));
  }
  if (lx.size() >= 2) rep.slope = detail::ols(lx, ly).first;
  double lo = rep.rows.front().scaled, hi = lo;
  for (const auto& r : rep.rows) {
    lo = std::min(lo, r.scaled);
    hi = std::max(hi, r.scaled);
  }
  rep.band = hi / lo;
  return rep;
}

/// Checks sum_{x,y} (f(y) - f(x))^2 = 2 l sum_x f(x)^2 for mean-zero f.
inline bool mean_zero_identity_check(std::span<const double> f, double rel_tol = 1e-10) {
  const auto ell = f.size();
  detail::require(ell >= 1, "mean_zero_identity_check: empty vector");
  double sum = 0.0, sum2 = 0.0;
  for (double v : f) {
    sum += v;
    sum2 += v * v;
  }
  detail::require(std::fabs(sum) <= 1e-12 * std::max(1.0, std::sqrt(sum2 * static_cast<double>(ell))),
                  "mean_zero_identity_check: f must have zero mean");
  double lhs = 0.0;
  for (double a : f)
    for (double b : f) lhs += (b - a) * (b - a);
  const double rhs = 2.0 * static_cast<double>(ell) * sum2;
  return std::fabs(lhs - rhs) <= rel_tol * std::max(std::fabs(rhs), 1e-300) || (lhs == 0.0 && rhs == 0.0);
}

}  // namespace lrex
