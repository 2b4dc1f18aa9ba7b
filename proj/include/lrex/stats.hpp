#pragma once

// Summary statistics and the hypothesis checks used by the harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "random.hpp"

namespace lrex {

/// Outcome of one statistical check. `extras` carries named auxiliary numbers
/// (standard errors, moments, fitted exponents) for persistence.
struct StatReport {
  std::string name;
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double standard_error = 0.0;
  std::vector<std::pair<std::string, double>> extras;

  double extra(const std::string& key, double fallback = 0.0) const {
    for (const auto& [k, v] : extras)
      if (k == key) return v;
    return fallback;
  }
};

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double mean_se = 0.0;
  double variance_se = 0.0;
};

inline Moments moments(std::span<const double> xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  const double n = static_cast<double>(xs.size());
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - m.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (xs.size() > 1) m.variance = m2 * n / (n - 1.0);
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  m.mean_se = std::sqrt(m.variance / n);
  m.variance_se = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return m;
}

/// P(K > lambda) for the Kolmogorov distribution.
inline double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Asymptotic KS p-value with Stephens' finite-sample correction.
inline double ks_pvalue(double d, double effective_n) {
  const double sn = std::sqrt(effective_n);
  return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

/// sup |F_emp - F| for samples against a CDF.
inline double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

inline double ks_statistic_sorted_cdf(std::span<const double> sorted_samples, std::span<const double> cdf_values) {
  const double n = static_cast<double>(sorted_samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
    const double f = cdf_values[i];
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Two-sample KS statistic.
inline double ks_two_sample_statistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

inline StatReport ks_two_sample(std::span<const double> a, std::span<const double> b, double level = 0.01) {
  detail::require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  StatReport r;
  r.name = "ks_two_sample";
  r.statistic = ks_two_sample_statistic(a, b);
  const double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                    static_cast<double>(a.size() + b.size());
  const double p = ks_pvalue(r.statistic, ne);
  r.threshold = level;
  r.pass = p > level;
  r.extras = {{"p_value", p}};
  return r;
}

inline double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

/// Gaussianity at a target variance: mean and variance within `z_band` standard
/// errors, skewness and excess kurtosis within `z_band` of their normal-theory
/// standard errors, KS against N(0, target) above `level`.
inline StatReport gaussian_test(std::span<const double> xs, double target_variance, double z_band = 3.0,
                                double level = 0.01) {
  detail::require(xs.size() >= 500, "gaussian_test: need at least 500 samples");
  detail::require(target_variance > 0.0, "gaussian_test: target variance must be positive");
  const auto m = moments(xs);
  const double n = static_cast<double>(xs.size());
  const double z_mean = m.mean / m.mean_se;
  const double z_var = (m.variance - target_variance) / m.variance_se;
  const double z_skew = m.skewness / std::sqrt(6.0 / n);
  const double z_kurt = m.excess_kurtosis / std::sqrt(24.0 / n);
  const double sd = std::sqrt(target_variance);
  const double d = ks_statistic(xs, [sd](double x) { return normal_cdf(x, 0.0, sd); });
  const double p = ks_pvalue(d, n);

  StatReport r;
  r.name = "gaussian_test";
  r.statistic = d;
  r.threshold = level;
  r.standard_error = m.variance_se;
  r.pass = std::fabs(z_mean) < z_band && std::fabs(z_var) < z_band && std::fabs(z_skew) < z_band &&
           std::fabs(z_kurt) < z_band && p > level;
  r.extras = {{"mean", m.mean},         {"mean_se", m.mean_se},  {"variance", m.variance},
              {"variance_se", m.variance_se}, {"target_variance", target_variance},
              {"z_variance", z_var},    {"skewness", m.skewness}, {"excess_kurtosis", m.excess_kurtosis},
              {"z_skewness", z_skew},   {"z_kurtosis", z_kurt},   {"ks_p_value", p}};
  return r;
}

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

namespace detail {
inline std::pair<double, double> ols(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return {0.0, my};
  const double b = sxy / sxx;
  return {b, my - b * mx};
}
}  // namespace detail

/// Least-squares slope of log v against log u with a pairs-bootstrap 95% interval.
inline ScalingFit scaling_fit(std::span<const double> u, std::span<const double> v, std::uint64_t seed = 1,
                              int resamples = 1000) {
  detail::require(u.size() == v.size(), "scaling_fit: size mismatch");
  detail::require(u.size() >= 4, "scaling_fit: need at least 4 points");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < u.size(); ++i) {
    detail::require(u[i] > 0.0 && v[i] > 0.0, "scaling_fit: inputs must be positive");
    lx.push_back(std::log(u[i]));
    ly.push_back(std::log(v[i]));
  }
  ScalingFit fit;
  std::tie(fit.slope, fit.intercept) = detail::ols(lx, ly);
  const std::size_t k = lx.size();
  double rss = 0.0, sxx = 0.0;
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double e = ly[i] - fit.intercept - fit.slope * lx[i];
    rss += e * e;
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (k > 2 && sxx > 0.0) fit.slope_se = std::sqrt(rss / static_cast<double>(k - 2) / sxx);

  Rng rng(seed);
  std::vector<double> slopes;
  std::vector<double> bx(k), by(k);
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = static_cast<std::size_t>(rng.below(k));
      bx[i] = lx[j];
      by[i] = ly[j];
    }
    slopes.push_back(detail::ols(bx, by).first);
  }
  if (slopes.empty()) {
    fit.ci_low = fit.ci_high = fit.slope;
  } else {
    std::sort(slopes.begin(), slopes.end());
    auto q = [&](double p) { return slopes[static_cast<std::size_t>(p * static_cast<double>(slopes.size() - 1))]; };
    fit.ci_low = q(0.025);
    fit.ci_high = q(0.975);
  }
  return fit;
}

/// Empirical E[X Y] from paired replicate values.
struct PairedMean {
  double mean = 0.0;
  double se = 0.0;
};

inline PairedMean product_mean(std::span<const double> x, std::span<const double> y) {
  detail::require(x.size() == y.size() && x.size() >= 2, "product_mean: need matching samples");
  std::vector<double> prod(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) prod[i] = x[i] * y[i];
  const auto m = moments(prod);
  return {m.mean, m.mean_se};
}

/// Empirical cross-covariances at several lags against oracle values; passes
/// when every standardized deviation is below `z_band`.
inline StatReport covariance_compare(const std::vector<std::vector<double>>& y_t, std::span<const double> y_0,
                                     std::span<const double> oracle, double z_band = 3.0) {
  if (y_t.size() != oracle.size()) throw MeshMismatch("covariance_compare: lag count differs from oracle");
  StatReport r;
  r.name = "covariance_compare";
  r.threshold = z_band;
  double worst = 0.0;
  for (std::size_t k = 0; k < y_t.size(); ++k) {
    if (y_t[k].size() != y_0.size()) throw MeshMismatch("covariance_compare: replicate count mismatch");
    const auto pm = product_mean(y_t[k], y_0);
    const double z = (pm.mean - oracle[k]) / pm.se;
    worst = std::max(worst, std::fabs(z));
    const std::string tag = std::to_string(k);
    r.extras.emplace_back("empirical_" + tag, pm.mean);
    r.extras.emplace_back("se_" + tag, pm.se);
    r.extras.emplace_back("oracle_" + tag, oracle[k]);
    r.extras.emplace_back("z_" + tag, z);
  }
  r.statistic = worst;
  r.pass = worst < z_band;
  return r;
}

}  // namespace lrex
