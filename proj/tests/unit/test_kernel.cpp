#include <gtest/gtest.h>

#include <boost/math/special_functions/zeta.hpp>

#include <cmath>
#include <map>
#include <vector>

#include "lrex/kernel.hpp"

using namespace lrex;

namespace {

KernelParams params(double alpha, double cp, double cm, double lambda = 0.0, std::int64_t n = 1) {
  KernelParams p;
  p.alpha = alpha;
  p.c_plus = cp;
  p.c_minus = cm;
  p.weak_lambda = lambda;
  p.scale_n = n;
  return p;
}

}  // namespace

TEST(Kernel, RatesAndDecomposition) {
  const JumpKernel k(params(1.5, 2.0, 1.0));
  EXPECT_DOUBLE_EQ(k(0), 0.0);
  EXPECT_DOUBLE_EQ(k(1), 2.0);
  EXPECT_DOUBLE_EQ(k(-1), 1.0);
  EXPECT_NEAR(k(4), 2.0 / 32.0, 1e-15);
  for (Site z : {1, 2, 7, -3, 100}) {
    EXPECT_NEAR(k.symmetric(z) + k.antisymmetric(z), k(z), 1e-15);
    EXPECT_NEAR(k.symmetric(z), k.symmetric(-z), 1e-15);
    EXPECT_NEAR(k.antisymmetric(z), -k.antisymmetric(-z), 1e-15);
  }
  const JumpKernel sym(params(1.2, 1.0, 1.0));
  for (Site z = -20; z <= 20; ++z) EXPECT_EQ(sym.antisymmetric(z), 0.0);
}

TEST(Kernel, WeakTermSitsOnTheUnitJump) {
  const JumpKernel k(params(1.2, 1.0, 1.0, 0.5, 64));
  const double weak = 0.5 * std::pow(64.0, 1.5 - 1.2);
  EXPECT_NEAR(k(1), 1.0 + weak, 1e-14);
  EXPECT_NEAR(k(-1), 1.0, 1e-15);
  EXPECT_NEAR(k.total_rate(), 2.0 * boost::math::zeta(2.2) + weak, 1e-12);
  EXPECT_FALSE(k.params().symmetric());
}

TEST(Kernel, TotalRateMatchesZeta) {
  for (double a : {0.5, 0.8, 1.0, 1.2, 1.5, 1.9}) {
    const JumpKernel k(params(a, 2.0, 0.5));
    EXPECT_NEAR(k.total_rate(), 2.5 * boost::math::zeta(1.0 + a), 1e-12 * k.total_rate()) << a;
  }
}

TEST(Kernel, FirstMomentAndCentering) {
  const JumpKernel k(params(1.5, 2.0, 1.0));
  ASSERT_TRUE(k.first_moment().has_value());
  EXPECT_NEAR(*k.first_moment(), boost::math::zeta(1.5), 1e-12);
  EXPECT_NEAR(*k.mean_drift_m(), 0.5 * boost::math::zeta(1.5), 1e-12);
  EXPECT_NEAR(centering_constant(k, 128), std::pow(128.0, 1.5) * boost::math::zeta(1.5), 1e-8);

  const JumpKernel below(params(0.8, 2.0, 1.0));
  EXPECT_FALSE(below.first_moment().has_value());
  EXPECT_EQ(centering_constant(below, 128), 0.0);
  EXPECT_THROW(mean_drift(below), InvalidRegime);

  const JumpKernel one(params(1.0, 2.0, 1.0));
  double brute = 0.0;
  for (int x = 1; x <= 50; ++x) brute += x * (one(x) - one(-x));
  EXPECT_NEAR(centering_constant(one, 50), 50.0 * brute, 1e-10);
}

TEST(Kernel, TailMassIsTheRemainingSum) {
  const JumpKernel k(params(1.2, 1.5, 0.5));
  double brute = 0.0;
  for (Site d = 1; d <= 10; ++d) brute += k(d) + k(-d);
  EXPECT_NEAR(k.tail_mass(10), k.total_rate() - brute, 1e-12);
}

TEST(Kernel, InvalidParameters) {
  EXPECT_THROW(JumpKernel(params(0.0, 1.0, 1.0)), InvalidArgument);
  EXPECT_THROW(JumpKernel(params(2.0, 1.0, 1.0)), InvalidArgument);
  EXPECT_THROW(JumpKernel(params(1.5, -1.0, 1.0)), InvalidArgument);
  EXPECT_THROW(JumpKernel(params(1.5, 0.0, 0.0)), InvalidArgument);
}

TEST(Series, PowerSumAgainstBruteForce) {
  // sum_{k>=0} (0.3 + 2k)^{-2.5}: brute force to 2e6 terms plus an integral tail
  double brute = 0.0;
  const std::int64_t m = 2000000;
  for (std::int64_t k = m - 1; k >= 0; --k) brute += std::pow(0.3 + 2.0 * k, -2.5);  // smallest first
  brute += std::pow(0.3 + 2.0 * m - 1.0, -1.5) / (2.0 * 1.5);
  EXPECT_NEAR(power_sum(2.5, 0.3, 2.0, 0), brute, 1e-12);
  for (double s : {1.1, 1.5, 2.2, 3.0}) EXPECT_NEAR(zeta(s), boost::math::zeta(s), 1e-13 * boost::math::zeta(s));
  EXPECT_NEAR(partial_power_sum(1.0, 4), 1.0 + 0.5 + 1.0 / 3.0 + 0.25, 1e-15);
  EXPECT_THROW(power_sum(1.0, 1.0, 1.0, 0), InvalidArgument);
}

TEST(Alias, EmpiricalFrequencies) {
  const std::vector<double> w{1.0, 0.0, 3.0, 0.5, 5.5};
  const AliasTable table(w);
  Rng rng(3);
  std::vector<double> count(w.size(), 0.0);
  const int draws = 400000;
  for (int i = 0; i < draws; ++i) count[table.sample(rng)] += 1.0;
  EXPECT_EQ(count[1], 0.0);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double e = draws * w[i] / 10.0;
    if (e > 0) chi2 += (count[i] - e) * (count[i] - e) / e;
  }
  EXPECT_LT(chi2, 16.3);  // chi-square 4 dof, 0.3% quantile
  EXPECT_THROW(AliasTable(std::vector<double>{0.0, 0.0}), InvalidArgument);
}

TEST(Ring, FoldedRatesMatchImageSums) {
  const JumpKernel k(params(1.2, 2.0, 1.0));
  const Site N = 64;
  const RingKernel ring(k, N);
  for (Site d : {1, 5, 31, 32, 63}) {
    const Site J = 400000;
    // integral tails of both image sums beyond J, then the terms smallest first
    const double jn = (static_cast<double>(J) - 0.5) * N;
    double brute = 2.0 * std::pow(d + jn, -1.2) / (1.2 * N) + 1.0 * std::pow(N - d + jn, -1.2) / (1.2 * N);
    for (Site j = J - 1; j >= 0; --j) {
      brute += k(d + j * N);
      brute += k(d - (j + 1) * N);
    }
    EXPECT_NEAR(ring.folded_rate(d), brute, 1e-9 * brute) << d;
  }
  const double self = 3.0 * boost::math::zeta(2.2) * std::pow(64.0, -2.2);
  EXPECT_NEAR(ring.q_star(), k.total_rate() - self, 1e-10);
  EXPECT_EQ(ring.folded_rate(0), 0.0);
  EXPECT_THROW(RingKernel(k, 63), InvalidArgument);
}

TEST(Ring, SamplerFollowsFoldedRates) {
  const JumpKernel k(params(0.8, 1.0, 2.0));
  const RingKernel ring(k, 16);
  Rng rng(11);
  std::map<Site, double> count;
  const int draws = 300000;
  for (int i = 0; i < draws; ++i) count[ring.sample_displacement(rng)] += 1.0;
  for (Site d = 1; d < 16; ++d) {
    const double p = ring.folded_rate(d) / ring.q_star();
    EXPECT_NEAR(count[d] / draws, p, 4.0 * std::sqrt(p * (1 - p) / draws)) << d;
  }
}
