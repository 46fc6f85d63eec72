#include <cmath>
#include <gtest/gtest.h>

#include "cmcaf/param_core.hpp"

using namespace cmcaf;

TEST(ParamPoint, RejectsInvalid) {
  EXPECT_THROW(ParamPoint(0, 1, 1), DomainError);
  EXPECT_THROW(ParamPoint(1, -1, 1), DomainError);
  EXPECT_THROW(ParamPoint(1, 1, 0.5), DomainError);
  EXPECT_THROW(ParamPoint(NAN, 1, 1), DomainError);
  EXPECT_THROW(ParamPoint(1, INFINITY, 2), DomainError);
  EXPECT_NO_THROW(ParamPoint(0.5, 3, 1));
}

TEST(DeriveConstants, HandValues) {
  auto d = derive_constants({1, 1, 1});
  EXPECT_EQ(d.A, 1);
  EXPECT_EQ(d.B, 1);
  EXPECT_EQ(d.C, 0);
  EXPECT_EQ(d.a_hat, 0);
  d = derive_constants({1, 1, 2});
  EXPECT_DOUBLE_EQ(d.C, 0.75);
  EXPECT_DOUBLE_EQ(d.a_hat, 0.5625);
  d = derive_constants({2, 1, 1});
  EXPECT_DOUBLE_EQ(d.A, 1.25);
  EXPECT_DOUBLE_EQ(d.a_hat, -0.25);
}

TEST(DeriveConstants, InversionInvariant) {
  for (double a : {0.3, 1.0, 1.7, 4.0})
    for (double b : {0.25, 1.0, 2.5}) {
      const auto d = derive_constants({a, b, 1.8});
      const auto e = derive_constants({1 / a, 1 / b, 1.8});
      EXPECT_NEAR(d.A, e.A, 1e-15 * d.A);
      EXPECT_NEAR(d.B, e.B, 1e-15 * d.B);
      EXPECT_NEAR(d.A_minus_one, d.A - 1, 1e-14);
    }
}

TEST(Quartic, ValueAtZeroIsMinusOne) {
  for (double a : {0.5, 1.0, 2.0, 3.3})
    for (double g : {1.0, 1.5, 4.0}) EXPECT_EQ(quartic({a, 1.7, g}).eval(0), -1.0);
}

TEST(Quartic, Roots) {
  auto q = quartic({2, 1, 2});
  EXPECT_DOUBLE_EQ(q.rho0, 0.25);
  EXPECT_DOUBLE_EQ(q.rho1, 1.0);
  q = quartic({1, 3, 2.5});
  EXPECT_EQ(q.rho0, q.rho1);
  EXPECT_DOUBLE_EQ(q.rho0, 1 / 2.5);
  EXPECT_TRUE(q.double_positive_root);

  for (double a : {1.0, 1.4, 3.0})
    for (double b : {1.0, 2.0, 5.0})
      for (double g : {1.0, 1.3, 2.7}) {
        const auto p = quartic({a, b, g});
        double scale = 0;
        for (double c : p.coeffs) scale = std::max(scale, std::abs(c));
        for (double r : {p.rho0, p.rho1, p.neg_root_a, p.neg_root_b})
          EXPECT_NEAR(p.eval(r), 0, 1e-12 * scale * std::max(1.0, std::pow(std::abs(r), 4)));
      }
}

TEST(Quartic, CoefficientsInvariantUnderInversion) {
  for (double a : {1.0, 1.5, 3.0})
    for (double b : {1.0, 2.0, 6.0}) {
      const auto p = quartic({a, b, 1.9});
      const auto pa = quartic({1 / a, b, 1.9});
      const auto pb = quartic({a, 1 / b, 1.9});
      for (int k = 0; k < 5; ++k) {
        EXPECT_NEAR(p.coeffs[k], pa.coeffs[k], 1e-13 * std::max(1.0, std::abs(p.coeffs[k])));
        EXPECT_NEAR(p.coeffs[k], pb.coeffs[k], 1e-13 * std::max(1.0, std::abs(p.coeffs[k])));
      }
    }
}

TEST(Quartic, DerivativeMatchesDifference) {
  const auto p = quartic({1.6, 2.2, 1.4});
  for (double x : {-2.0, 0.1, 0.7, 1.9}) {
    const double h = 1e-5;
    EXPECT_NEAR(p.eval_derivative(x), (p.eval(x + h) - p.eval(x - h)) / (2 * h), 1e-6);
  }
}

TEST(Cubic, AlphaBetaOneSqrt3) {
  const auto q = cubic({1, 1, std::sqrt(3.0)});
  EXPECT_NEAR(q.r3, 4.0 / 3, 1e-15);
  EXPECT_EQ(q.r1, 0);
  EXPECT_EQ(q.r2, 0);
  EXPECT_TRUE(q.zero_root);
  EXPECT_TRUE(q.double_negative_root);
  for (double x : {-1.0, 0.5, 2.0})
    EXPECT_NEAR(q.eval(x), -(x - 4.0 / 3) * x * x, 1e-14 * std::max(1.0, std::abs(x * x * x)));
}

TEST(Cubic, VietaAndRoots) {
  const auto q = cubic({1, 2, 2});
  EXPECT_NEAR(q.r1 * q.r2, 0.015625, 1e-15);
  EXPECT_TRUE(q.double_negative_root);  // alpha = 1 makes the discriminant vanish
  EXPECT_FALSE(q.zero_root);

  for (double a : {1.0, 1.3, 2.0})
    for (double b : {1.0, 1.5, 4.0})
      for (double g : {1.2, 2.0, 3.5}) {
        const ParamPoint p(a, b, g);
        const auto c = cubic(p);
        const auto d = derive_constants(p);
        EXPECT_DOUBLE_EQ(c.r3, d.C * d.C + 1);
        EXPECT_NEAR(c.eval(c.r3), 0, 1e-12 * c.r3 * c.r3 * c.r3);
        EXPECT_LE(c.r1, c.r2);
        EXPECT_LE(c.r2, 0);
        EXPECT_NEAR(c.r1 + c.r2, 1 - d.A * d.B, 1e-13 * d.A * d.B);
        EXPECT_EQ(c.zero_root, a == b);
        EXPECT_EQ(c.eval(0) == 0, a == b);
        for (int k = 1; k < 20; ++k) {
          const double x = std::max(c.r2, 0.0) + (c.r3 - std::max(c.r2, 0.0)) * k / 20.0;
          EXPECT_GT(c.eval(x), 0);
        }
      }
}

TEST(Region, Membership) {
  auto r = region_membership({1, 1, std::sqrt(3.0)});
  EXPECT_NEAR(r.L_aux, 1.0 / 3, 1e-15);
  EXPECT_TRUE(r.in_W);
  for (double a : {1.0, 1.5, 3.0})
    for (double g : {1.01, 2.0}) {
      r = region_membership({a, a, g});
      const auto d = derive_constants({a, a, g});
      EXPECT_EQ(r.L_aux, d.C * d.C);
      EXPECT_TRUE(r.in_W);
    }
  r = region_membership({1, 200, 1.5});
  EXPECT_LT(r.L_aux, 0);
  EXPECT_FALSE(r.in_W);
  EXPECT_FALSE(region_membership({2, 1.5, 2}).in_W);  // beta < alpha
  EXPECT_FALSE(region_membership({1.5, 2, 1}).in_W);  // gamma = 1
  EXPECT_FALSE(region_membership({0.5, 2, 2}).in_O);
}
