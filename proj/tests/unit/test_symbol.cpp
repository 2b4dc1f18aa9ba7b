#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "lrex/generator.hpp"
#include "lrex/symbol.hpp"

using namespace lrex;
using C = std::complex<double>;

namespace {

C gamma_symbol(const LevyCoefficients& lc, double xi) {
  const double g = boost::math::tgamma(-lc.alpha);
  return g * (lc.c_plus * std::pow(C(0.0, -xi), lc.alpha) + lc.c_minus * std::pow(C(0.0, xi), lc.alpha));
}

// The grid route is periodic with period P, so it adds the images of the line
// solution. Far from the bulk P_t f(x) ~ t |f|_1 c / |x|^{1+a}, with c- on the
// right (the walk must jump left) and c+ on the left.
double image_sum(const LevyCoefficients& lc, double t, double mass, double x, double P) {
  double acc = 0.0;
  for (int k = 200000; k >= 1; --k)
    acc += lc.c_minus * std::pow(k * P + x, -1.0 - lc.alpha) + lc.c_plus * std::pow(k * P - x, -1.0 - lc.alpha);
  return t * mass * acc;
}

}  // namespace

TEST(Symbol, DirectQuadratureMatchesGammaFormula) {
  for (double a : {0.3, 0.8, 1.2, 1.5, 1.9}) {
    const LevyCoefficients lc{a, 2.0, 0.7};
    for (double xi : {-3.0, -1.0, 0.25, 1.0, 2.5}) {
      const C direct = characteristic_exponent_direct(lc, xi);
      const C oracle = gamma_symbol(lc, xi);
      EXPECT_NEAR(direct.real(), oracle.real(), 1e-10 * std::abs(oracle)) << a << " " << xi;
      EXPECT_NEAR(direct.imag(), oracle.imag(), 1e-10 * std::abs(oracle)) << a << " " << xi;
    }
  }
}

TEST(Symbol, DilationAgreesWithDirectEvaluation) {
  for (double a : {0.8, 1.0, 1.5}) {
    const LevyCoefficients lc{a, 1.0, 0.25};
    const StableSymbol sym(lc);
    for (double xi : {-7.0, -0.3, 0.05, 3.0}) {
      const C direct = characteristic_exponent_direct(lc, xi);
      EXPECT_NEAR(std::abs(sym(xi) - direct), 0.0, 1e-9 * std::abs(direct)) << a << " " << xi;
    }
    EXPECT_EQ(sym(0.0), C(0.0, 0.0));
  }
}

TEST(Symbol, AlphaOneSymmetricIsCauchy) {
  const StableSymbol sym(LevyCoefficients{1.0, 2.0, 2.0});
  for (double xi : {-2.0, 0.5, 4.0}) {
    EXPECT_NEAR(sym(xi).real(), -2.0 * std::numbers::pi * std::fabs(xi), 1e-10);
    EXPECT_NEAR(sym(xi).imag(), 0.0, 1e-10);
  }
}

TEST(Symbol, RealPartIsNonpositive) {
  const StableSymbol sym(LevyCoefficients{1.3, 3.0, 0.0});
  for (double xi = -10.0; xi <= 10.0; xi += 0.37) EXPECT_LE(sym(xi).real(), 0.0);
  EXPECT_THROW(StableSymbol(LevyCoefficients{2.0, 1.0, 1.0}), InvalidArgument);
}

TEST(Semigroup, TimeZeroIsIdentityAndRoutesAgree) {
  const LevyCoefficients lc{1.5, 2.0, 1.0};
  const StableSymbol sym(lc);
  const auto f = TestFunction::gaussian();
  for (double x : {-1.0, 0.0, 0.7}) EXPECT_NEAR(semigroup_at(sym, 0.0, f, x), f(x), 1e-12);
  const SpatialGrid grid{64.0, std::size_t{1} << 14};
  const auto pf = semigroup_apply(sym, 0.5, f, grid);
  for (std::size_t j : {grid.M / 2, grid.M / 2 + 100, grid.M / 2 - 300}) {
    const double x = grid.point(j);
    const double images = image_sum(lc, 0.5, std::sqrt(std::numbers::pi), x, 2.0 * grid.L);
    EXPECT_GT(images, 1e-5);
    EXPECT_NEAR(pf[j], semigroup_at(sym, 0.5, f, x) + images, 1e-6) << x;
  }
  // mass is conserved
  double mass = 0.0;
  for (double v : pf) mass += v * grid.dx();
  EXPECT_NEAR(mass, std::sqrt(std::numbers::pi), 1e-9);
}

TEST(Semigroup, AliasingIsReported) {
  const StableSymbol sym(LevyCoefficients{0.5, 1.0, 1.0});
  const SpatialGrid small{8.0, 1024};
  EXPECT_THROW(semigroup_apply(sym, 5.0, TestFunction::gaussian(), small), NumericalError);
}

TEST(OuCovariance, ParsevalAndGridAgree) {
  const StableSymbol sym(LevyCoefficients{1.2, 1.6, 0.4});
  const auto f = TestFunction::gaussian();
  const auto g = TestFunction::gaussian(0.5, 0.8);
  const double chi = 0.21;
  EXPECT_NEAR(ou_covariance(sym, chi, 0.0, f, g), chi * inner_product(f, g), 1e-12);
  for (double t : {0.25, 0.5, 1.0}) {
    const SpatialGrid grid{128.0, std::size_t{1} << 15};
    const double line = ou_covariance(sym, chi, t, f, g);
    // g is concentrated near 0.5 with mass 0.8 sqrt(pi)
    const double images = chi * 0.8 * std::sqrt(std::numbers::pi) *
                          image_sum(LevyCoefficients{1.2, 1.6, 0.4}, t, std::sqrt(std::numbers::pi), 0.5, 2.0 * grid.L);
    const double b = ou_covariance_grid(sym, chi, t, f, g, grid);
    EXPECT_NEAR(line + images, b, 2e-5 * std::fabs(line)) << t;
    EXPECT_NEAR(periodic_image_correction(sym, chi, t, f, g, grid), images, 1e-3 * images) << t;
  }
}

TEST(OuCovariance, QuadraticVariationStartsAtTwiceTheEnergy) {
  const LevyCoefficients lc{1.5, 2.0, 1.0};
  const StableSymbol sym(lc);
  const auto f = TestFunction::gaussian();
  const double chi = 0.25;
  EXPECT_NEAR(ou_martingale_qv(sym, chi, 0.0, f), 0.0, 1e-15);
  const double h = 1e-5;
  const double slope = ou_martingale_qv(sym, chi, h, f) / h;
  EXPECT_NEAR(slope, 2.0 * chi * dirichlet_form_continuous(lc, f), 1e-3 * slope);
  // chi(||f||^2 - ||P_t f||^2) grows toward chi ||f||^2
  EXPECT_LT(ou_martingale_qv(sym, chi, 50.0, f), chi * l2_norm_squared(f));
  EXPECT_GT(ou_martingale_qv(sym, chi, 50.0, f), ou_martingale_qv(sym, chi, 1.0, f));
}
