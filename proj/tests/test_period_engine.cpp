#include <cmath>
#include <numbers>
#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cmcaf/period_engine.hpp"

using namespace cmcaf;
using std::numbers::pi;

namespace {

// Independent route: tanh-sinh on the unregularized integrand over [rho0, rho1].
double per_raw(double a, double b, double g) {
  const double r0 = std::min(1 / (a * g), a / g), r1 = std::max(1 / (a * g), a / g);
  const double mid = 0.5 * (r0 + r1);
  // xc is the signed distance to the nearer endpoint, which keeps the
  // vanishing factor accurate next to the singularities.
  auto f = [&](double x, double xc) {
    const double lo = x < mid ? (xc < 0 ? -xc : x - r0) : x - r0;
    const double hi = x >= mid ? (xc > 0 ? xc : r1 - x) : r1 - x;
    const double p = lo * hi * (x + b * g) * (x + g / b);
    return (x - 1 / x) / std::sqrt(p);
  };
  boost::math::quadrature::tanh_sinh<double> ts(15);
  return ts.integrate(f, r0, r1, 1e-14) / pi;
}

}  // namespace

TEST(PerMap, ZeroAtGammaOne) {
  for (double a : {0.5, 1.0, 2.0, 5.0})
    for (double b : {1.0, 3.0}) EXPECT_EQ(per_map({a, b, 1}), 0.0);
}

TEST(PerMap, ClosedFormValue) { EXPECT_NEAR(per_map({1, 1, 2}), -0.6, 1e-15); }

TEST(PerMap, MatchesRawIntegral) {
  const double v = per_map({2, 1, 3});
  EXPECT_GT(v, -1);
  EXPECT_LT(v, 0);
  EXPECT_NEAR(v, per_raw(2, 1, 3), 1e-9);
  for (double a : {1.001, 1.2, 3.0})
    for (double b : {1.0, 2.0, 7.0})
      for (double g : {1.1, 2.0, 5.0}) EXPECT_NEAR(per_map({a, b, g}), per_raw(a, b, g), 1e-9);
}

TEST(PerMap, QuadratureApproachesClosedForm) {
  // Just above the switch to the closed form the two routes must meet.
  for (double b : {1.0, 2.5})
    for (double g : {1.3, 3.0})
      EXPECT_NEAR(per_quadrature({1 + 2e-8, b, g}), per_closed_form_alpha_one(b, g), 1e-9);
}

TEST(PerMap, Symmetries) {
  for (double a : {1.0, 1.5, 4.0})
    for (double b : {1.0, 2.0, 6.0})
      for (double g : {1.2, 2.5}) {
        const double v = per_map({a, b, g});
        EXPECT_NEAR(v, per_map({1 / a, b, g}), 1e-10);
        EXPECT_NEAR(v, per_map({a, 1 / b, g}), 1e-10);
      }
}

TEST(PerMap, DecreasingInGammaWithLimitMinusOne) {
  for (double a : {1.0, 1.7, 3.0})
    for (double b : {1.0, 2.0, 9.0}) {
      double prev = per_map({a, b, 1});
      for (double g = 1.05; g < 6; g += 0.25) {
        const double v = per_map({a, b, g});
        EXPECT_LT(v, prev);
        EXPECT_GT(v * pi, -pi);
        EXPECT_LT(v * pi, 0);
        prev = v;
      }
      double g = 2;
      while (per_map({a, b, g}) >= -0.9 && g < 1e6) g *= 2;
      EXPECT_LT(per_map({a, b, g}), -0.9);
    }
}

TEST(Sigma, ClosedForm) {
  EXPECT_NEAR(sigma_period({1, 1, 2}), 4 * pi / 5, 1e-14);
  for (double b : {1.0, 2.0, 5.0})
    for (double g : {1.0, 1.5, 3.0}) {
      EXPECT_NEAR(sigma_period({1, b, g}), sigma_closed_form_alpha_one(b, g), 1e-10);
      EXPECT_NEAR(sigma_quadrature({1, b, g}), sigma_closed_form_alpha_one(b, g), 1e-10);
    }
}

TEST(Sigma, InversionSymmetric) {
  for (double a : {1.2, 2.0, 4.0})
    for (double b : {1.0, 3.0})
      for (double g : {1.0, 2.2}) {
        const double s = sigma_period({a, b, g});
        EXPECT_GT(s, 0);
        EXPECT_NEAR(s, sigma_period({1 / a, b, g}), 1e-10);
      }
}

TEST(GammaLevel, Values) {
  EXPECT_EQ(gamma_level(0, 1.5, 2), 1.0);
  EXPECT_NEAR(gamma_level(-0.5, 1, 1), std::sqrt(3.0), 1e-12);
  for (int n = 2; n <= 6; ++n) {
    const double c = -1.0 / n;
    const double g = gamma_level(c, 1, 1);
    const double C = 0.5 * (g - 1 / g);
    EXPECT_NEAR(C * C, c * c * 2 / (2 * (1 - c * c)), 1e-12);
  }
  for (double b : {1.0, 2.0, 5.0}) {
    const double g = gamma_level(-1.0 / 3, 1.4, b);
    EXPECT_NEAR(per_map({1.4, b, g}), -1.0 / 3, 1e-12);
  }
}

TEST(GammaLevel, MonotoneInLevel) {
  double prev = 1;
  for (double c = -0.05; c > -0.99; c -= 0.1) {
    const double g = gamma_level(c, 1.3, 2.4);
    EXPECT_GT(g, prev);
    prev = g;
  }
  EXPECT_THROW(gamma_level(-1, 1, 1), DomainError);
  EXPECT_THROW(gamma_level(0.1, 1, 1), DomainError);
}

TEST(STHalfPeriods, LAgainstSubstitutedQuadrature) {
  const auto st = st_half_periods({1, 1, std::sqrt(3.0)});
  EXPECT_TRUE(st.M_infinite());
  // x = 1 + (1/3) sin^2(phi), phi in [0, pi/2] removes both endpoint singularities.
  auto f = [](double phi) {
    const double s = std::sin(phi);
    const double x = 1 + s * s / 3;
    return 2 / (x * std::sqrt(x));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  EXPECT_NEAR(st.L_half, ts.integrate(f, 0.0, pi / 2), 1e-12);
}

TEST(STHalfPeriods, DegenerateAndOrdering) {
  for (double a : {1.0, 1.5, 3.0}) EXPECT_TRUE(st_half_periods({a, a, 1.8}).M_infinite());
  const double g = gamma_level(-0.5, 1, 2);
  // alpha = 1 is a double negative root of q as well, so M diverges there.
  EXPECT_TRUE(st_half_periods({1, 2, g}).M_infinite());
  for (double a : {1.1, 1.5})
    for (double b : {2.0, 4.0}) {
      const double gl = gamma_level(-0.5, a, b);
      const auto st = st_half_periods({a, b, gl});
      ASSERT_FALSE(st.M_infinite());
      EXPECT_GT(st.L_half, 0);
      EXPECT_LT(st.L_half, st.M_half);
    }
  EXPECT_THROW(st_half_periods({1, 2, 1}), DomainError);
}
