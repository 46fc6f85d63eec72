#include <cmath>
#include <numbers>
#include <gtest/gtest.h>

#include "cmcaf/surface_integrator.hpp"

using namespace cmcaf;
using std::numbers::pi;

namespace {

ParamPoint generic_point() { return {1.3, 2.5, gamma_level(-0.5, 1.3, 2.5)}; }

// Nodoid oracle: omega'' = -sinh cosh, turning angle' = cosh(omega), the
// profile in the (x1, x3) plane, stopped where the tangent line meets (-r, 0, 0).
double nodoid_delta(double gamma) {
  const double r = 2 / (gamma * gamma - 1);
  using S = std::array<double, 5>;  // omega, omega', angle, x1, x3
  auto sys = [](const S& s, S& d, double) {
    d[0] = s[1];
    d[1] = -std::sinh(s[0]) * std::cosh(s[0]);
    d[2] = std::cosh(s[0]);
    const double X = std::exp(s[0]);
    d[3] = X * std::sin(s[2]);
    d[4] = X * std::cos(s[2]);
  };
  auto g = [&](double u) {
    const S s = numerics::integrate_to(sys, S{-std::log(gamma), 0, 0, 0, 0}, 0.0, u, 1e-13);
    return (s[3] + r) * std::cos(s[2]) - s[4] * std::sin(s[2]);
  };
  double lo = 1e-3;
  for (double u = 0.01;; u += 0.01) {
    if ((g(u) > 0) != (g(lo) > 0)) return numerics::solve_bracketed(g, lo, u, 1e-14, 1e-15);
    lo = u;
  }
}

}  // namespace

TEST(Profile, EndpointsAndPeriod) {
  const ParamPoint p(2, 1, 2);
  const double s = sigma_period(p);
  const auto q = quartic(p);
  const double vs[4] = {0, s, 2 * s, 3 * s};
  const auto x = profile_x(p, std::span<const double>(vs, 4));
  EXPECT_NEAR(x[0].x, q.rho0, 1e-12);
  EXPECT_NEAR(x[1].x, q.rho1, 1e-9);
  EXPECT_NEAR(x[2].x, q.rho0, 1e-9);
  EXPECT_NEAR(x[3].x, q.rho1, 1e-9);
}

TEST(Profile, SecondOrderEquationAndMonotone) {
  const ParamPoint p = generic_point();
  const double s = sigma_period(p);
  const auto q = quartic(p);
  const auto grid = uniform_grid(0, 2 * s, 801);
  const auto x = profile_x(p, grid);
  std::vector<double> xs;
  for (const auto& e : x) xs.push_back(e.x);
  const double h = grid[1] - grid[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_LT(std::abs(4 * x[i].x_prime * x[i].x_prime - q.eval(x[i].x)), 1e-9);
    EXPECT_NEAR(8 * numerics::fd_second(xs, i, h), q.eval_derivative(x[i].x), 1e-6);
    EXPECT_NEAR(numerics::fd_first(xs, i, h), x[i].x_prime, 1e-7);
  }
  for (std::size_t i = 1; i <= 400; ++i) EXPECT_GT(xs[i], xs[i - 1]);
}

TEST(Profile, ConstantAtAlphaOne) {
  const double vs[3] = {0, 0.7, 3.1};
  for (const auto& e : profile_x({1, 3, 2}, std::span<const double>(vs, 3))) {
    EXPECT_EQ(e.x, 0.5);
    EXPECT_EQ(e.x_prime, 0);
  }
}

TEST(Phi, BoundaryRowIsQuartic) {
  const ParamPoint p = generic_point();
  const auto yz = yz_initial(p);
  const PhiQuartic phi{0, 0, yz[1], yz[3], derive_constants(p).a_hat};
  const auto q = quartic(p);
  for (double X : {0.1, 0.5, 1.0, 2.5}) {
    EXPECT_NEAR(phi(X), q.eval(X), 1e-12 * std::max(1.0, std::pow(X, 4)));
    const double h = 1e-6;
    EXPECT_NEAR(phi.derivative(X), (phi(X + h) - phi(X - h)) / (2 * h), 1e-6);
  }
}

class FieldTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    p_ = new ParamPoint(generic_point());
    sigma_ = sigma_period(*p_);
    u_ = uniform_grid(-0.8, 0.8, 129);
    v_ = uniform_grid(0, 2 * sigma_, 257);
    v_.pop_back();  // one period, periodic
    field_ = new OmegaField(build_omega(*p_, u_, v_));
  }
  static void TearDownTestSuite() {
    delete field_;
    delete p_;
  }
  static inline ParamPoint* p_ = nullptr;
  static inline double sigma_ = 0;
  static inline std::vector<double> u_, v_;
  static inline OmegaField* field_ = nullptr;
};

TEST_F(FieldTest, BoundaryRowAndSymmetry) {
  const auto& f = *field_;
  const auto prof = profile_x(*p_, v_);
  const std::size_t i0 = 64;
  ASSERT_EQ(u_[i0], 0.0);
  const std::size_t nv = v_.size();
  for (std::size_t j = 0; j < nv; ++j) EXPECT_NEAR(f.at(i0, j), std::log(prof[j].x), 1e-10);
  for (std::size_t i = 0; i < u_.size(); ++i) {
    EXPECT_LT(std::abs(f.omega_v[f.index(i, 0)]), 1e-15);
    EXPECT_LT(std::abs(f.omega_v[f.index(i, nv / 2)]), 1e-8);  // v = sigma
    for (std::size_t j = 1; j < nv / 2; ++j) {
      EXPECT_NEAR(f.at(i, j), f.at(i, nv - j), 1e-9);          // about v = 0
      EXPECT_NEAR(f.at(i, nv / 2 - j), f.at(i, nv / 2 + j), 1e-9);  // about v = sigma
    }
    EXPECT_NEAR(f.at(i, 7), f.at(u_.size() - 1 - i, 7), 1e-9);  // even in u
  }
  EXPECT_LT(f.phi_residual, 1e-9);
}

TEST_F(FieldTest, SinhGordon) { EXPECT_LE(sinh_gordon_residual(*field_), 1e-5); }

TEST(Field, AlphaOneMatchesPendulum) {
  const double g = std::sqrt(3.0);
  const ParamPoint p(1, 1, g);
  const auto u = uniform_grid(-1.5, 1.5, 61);
  const auto v = uniform_grid(0, 2, 9);
  const auto f = build_omega(p, u, v);
  using S = std::array<double, 2>;
  auto pend = [](const S& s, S& d, double) {
    d[0] = s[1];
    d[1] = -std::sinh(s[0]) * std::cosh(s[0]);
  };
  for (std::size_t i = 0; i < u.size(); ++i) {
    const S w = numerics::integrate_to(pend, S{-std::log(g), 0}, 0.0, u[i], 1e-13);
    for (std::size_t j = 0; j < v.size(); ++j) {
      EXPECT_NEAR(f.at(i, j), w[0], 1e-9);
      EXPECT_EQ(f.omega_v[f.index(i, j)], 0.0);
    }
  }
}

TEST(SeedCurve, InitialFrameAndPlanarity) {
  const ParamPoint p = generic_point();
  const auto seed = integrate_profile_frame(p, 1.0);
  const auto c = seed.at(0);
  EXPECT_EQ(c.psi, (Vec3{0, 0, 0}));
  EXPECT_EQ(c.frame.normal, (Vec3{1, 0, 0}));
  EXPECT_EQ(c.frame.e1, (Vec3{0, 0, 1}));
  EXPECT_EQ(c.frame.e2, (Vec3{0, -1, 0}));
  EXPECT_NEAR(c.omega, std::log(1 / (p.alpha() * p.gamma())), 1e-15);
  const double h = 1e-3;
  for (double u = -0.95; u < 0.95; u += 0.1) {
    const auto s = seed.at(u);
    EXPECT_LT(std::abs(s.psi.y), 1e-12);
    EXPECT_LT(frame_defect(s.frame), 1e-9);
    const Vec3 du = (seed.at(u + h).psi - seed.at(u - h).psi) / (2 * h);
    EXPECT_NEAR(norm(du), std::exp(s.omega), 1e-6);
  }
  EXPECT_THROW(seed.at(1.5), DomainError);
}

TEST(SeedCurve, NodoidCurvature) {
  const ParamPoint p(1, 2, gamma_level(-0.5, 1, 2));
  const auto seed = integrate_profile_frame(p, 1.5);
  const double h = 1e-3;
  for (double u = -1.3; u < 1.3; u += 0.2) {
    const auto a = seed.at(u - h), b = seed.at(u), c = seed.at(u + h);
    const Vec3 d1 = (c.psi - a.psi) / (2 * h);
    const Vec3 d2 = (c.psi - 2 * b.psi + a.psi) / (h * h);
    const double kappa = norm(cross(d1, d2)) / std::pow(norm(d1), 3);
    EXPECT_NEAR(kappa, std::exp(-b.omega) * std::cosh(b.omega), 1e-6);
  }
}

class PatchTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    p_ = new ParamPoint(generic_point());
    seed_ = new FrameCurve(integrate_profile_frame(*p_, 0.8));
    u_ = uniform_grid(-0.8, 0.8, 65);
    patch_ = new SurfacePatch(sweep_v(*p_, *seed_, u_, 2, 512));
  }
  static void TearDownTestSuite() {
    delete patch_;
    delete seed_;
    delete p_;
  }
  static inline ParamPoint* p_ = nullptr;
  static inline FrameCurve* seed_ = nullptr;
  static inline std::vector<double> u_;
  static inline SurfacePatch* patch_ = nullptr;
};

TEST_F(PatchTest, ClosureAndSeedRow) {
  const auto& P = *patch_;
  const std::size_t last = P.v.size() - 1;
  double diam = 0;
  for (std::size_t k = 0; k < P.psi.size(); k += 97) diam = std::max(diam, norm(P.psi[k] - P.psi[0]));
  for (std::size_t i = 0; i < P.u.size(); ++i) {
    EXPECT_LT(norm(P.point(i, last) - P.point(i, 0)), 1e-6 * diam);
    EXPECT_LT(norm(P.point(i, 0) - seed_->at(P.u[i]).psi), 1e-12);
  }
  EXPECT_LT(P.frame_defect_max, 1e-9);
}

TEST_F(PatchTest, MiddleRowIsHorizontal) {
  const auto& P = *patch_;
  const std::size_t i0 = 32;
  ASSERT_EQ(P.u[i0], 0.0);
  for (std::size_t j = 0; j < P.v.size(); ++j) EXPECT_LT(std::abs(P.point(i0, j).z), 1e-8);
}

TEST_F(PatchTest, MatchesColumnField) {
  const auto& P = *patch_;
  std::vector<double> v(P.v.begin(), P.v.begin() + 300);
  const auto f = build_omega(*p_, u_, v);
  for (std::size_t i = 0; i < u_.size(); i += 4)
    for (std::size_t j = 0; j < v.size(); j += 7) {
      EXPECT_NEAR(P.omega[P.index(i, j)], f.at(i, j), 1e-9);
      EXPECT_NEAR(P.omega_v[P.index(i, j)], f.omega_v[f.index(i, j)], 1e-8);
    }
}

TEST_F(PatchTest, MixedOrderProbe) {
  const auto& P = *patch_;
  for (auto [i, j] : {std::pair<std::size_t, std::size_t>{50, 77}, {10, 300}, {60, 511}}) {
    const auto r = probe_v_then_u(*p_, P.u[i], P.v[j]);
    EXPECT_LT(norm(r.psi - P.point(i, j)), 1e-6);
    EXPECT_LT(norm(r.normal - P.normal[P.index(i, j)]), 1e-6);
  }
}

TEST_F(PatchTest, ConformalCurvatureLines) {
  const auto& P = *patch_;
  const double hu = P.u[1] - P.u[0], hv = P.v[1] - P.v[0];
  const std::size_t nu = P.u.size(), nv = P.periodic_v_count();
  std::vector<double> cu(nu), cv(nv);
  for (std::size_t i = 3; i + 3 < nu; i += 5)
    for (std::size_t j = 0; j < nv; j += 13) {
      Vec3 pu, pv, puu, pvv;
      for (int c = 0; c < 3; ++c) {
        for (std::size_t k = 0; k < nu; ++k) cu[k] = P.point(k, j)[c];
        for (std::size_t k = 0; k < nv; ++k) cv[k] = P.point(i, k)[c];
        pu[c] = numerics::fd_first(cu, i, hu);
        puu[c] = numerics::fd_second(cu, i, hu);
        pv[c] = numerics::fd_first_periodic(cv, j, hv);
        pvv[c] = numerics::fd_second_periodic(cv, j, hv);
      }
      const std::size_t k = P.index(i, j);
      const double e2w = std::exp(2 * P.omega[k]);
      EXPECT_LT(std::abs(dot(pu, pv)) / e2w, 1e-6);
      EXPECT_NEAR(dot(pu, pu) / e2w, 1, 1e-6);
      EXPECT_NEAR(dot(pv, pv) / e2w, 1, 1e-6);
      const double w = P.omega[k];
      const double k1 = dot(puu, P.normal[k]) / e2w, k2 = dot(pvv, P.normal[k]) / e2w;
      EXPECT_NEAR(k1, std::exp(-w) * std::cosh(w), 1e-4 * std::abs(std::exp(-w) * std::cosh(w)));
      if (std::abs(w) > 0.05) {
        EXPECT_NEAR(k2, std::exp(-w) * std::sinh(w), 1e-4 * std::abs(std::exp(-w) * std::sinh(w)));
      }
    }
}

TEST_F(PatchTest, SphericalLines) {
  const auto& P = *patch_;
  for (std::size_t i = 0; i < P.u.size(); i += 4) {
    const auto s = sphere_data_at(*seed_, P.u[i]);
    if (s.planar) continue;
    for (std::size_t j = 0; j < P.v.size(); j += 3)
      EXPECT_NEAR(norm(P.point(i, j) - s.center), s.radius, 1e-6 * s.radius);
    const Vec3 out = (P.point(i, 0) - s.center) / s.radius;
    EXPECT_NEAR(dot(P.normal[P.index(i, 0)], out), std::cos(s.angle), 1e-9);
  }
}

TEST(Sphere, CentersOnVerticalLine) {
  const ParamPoint p = generic_point();
  const auto tr = integrate_yz(p);
  const double u1 = *tr.u1;
  const auto seed = integrate_profile_frame(p, u1);
  const auto ref = sphere_data_at(seed, 0.5 * u1);
  const double y0p = yz_initial(p)[1];
  for (int k = 1; k < 20; ++k) {
    const double u = u1 * k / 20.0;
    const auto s = sphere_data_at(seed, u);
    EXPECT_NEAR(s.center.x, ref.center.x, 1e-7);
    EXPECT_NEAR(s.center.y, ref.center.y, 1e-7);
    const double h = 1e-4 * u1;
    const double dc = (sphere_data_at(seed, u + h).c3 - sphere_data_at(seed, u - h).c3) / (2 * h);
    const double y = tr.vector_at(u)[0];
    EXPECT_NEAR(dc, y0p / (y * y), 1e-5 * std::abs(y0p / (y * y)));
    if (k > 1) {
      EXPECT_GT(s.c3, sphere_data_at(seed, u1 * (k - 1) / 20.0).c3);
    }
  }
}

TEST(Sphere, RightAngleWhereYEqualsZ) {
  const ParamPoint p(1, 3, gamma_level(-0.5, 1, 3));
  const auto tr = integrate_yz(p);
  const auto seed = integrate_profile_frame(p, *tr.u1);
  EXPECT_NEAR(sphere_data_at(seed, *tr.tau).angle, pi / 2, 1e-10);
  EXPECT_TRUE(sphere_data_at(seed, 0).planar);
}

TEST(UStar, BehaviourNearZeroAndStability) {
  const ParamPoint p = generic_point();
  const auto tr = integrate_yz(p);
  const double u1 = *tr.u1;
  const auto seed = integrate_profile_frame(p, u1);
  EXPECT_LT(sphere_data_at(seed, 1e-4 * u1).c3, -1e3);
  EXPECT_LT(sphere_data_at(seed, 1e-6 * u1).c3, 100 * sphere_data_at(seed, 1e-4 * u1).c3 * 0.99);
  const double us = find_u_star(seed, u1);
  EXPECT_GT(us, 0);
  EXPECT_LT(us, u1);
  EXPECT_LT(std::abs(sphere_data_at(seed, us).c3), 1e-10);
  Tolerances fine;
  fine.ode /= 10;
  fine.root /= 10;
  const auto seed2 = integrate_profile_frame(p, u1, fine);
  EXPECT_NEAR(find_u_star(seed2, u1, fine), us, 1e-8);
}

TEST(UStar, NodoidCentersOnAxis) {
  // At alpha = 1 the line of centers is the rotation axis through (-r, 0, 0).
  for (double b : {1.0, 3.0}) {
    const double g = gamma_level(-0.5, 1, b);
    const ParamPoint p(1, b, g);
    const auto tr = integrate_yz(p);
    const auto seed = integrate_profile_frame(p, *tr.u1);
    const double us = find_u_star(seed, *tr.u1);
    const auto s = sphere_data_at(seed, us);
    EXPECT_NEAR(s.center.x, -2 / (g * g - 1), 1e-9);
    EXPECT_NEAR(s.center.y, 0, 1e-12);
    // The tangent line at delta meets the axis point, where the sphere about
    // it is met at a right angle; u* and delta agree only when that sphere is
    // the one through the row at u*.
    const double delta = nodoid_delta(g);
    EXPECT_NEAR(std::abs(dot(seed.at(delta).frame.e1, seed.at(delta).psi - s.center)),
                norm(seed.at(delta).psi - s.center), 1e-8);
  }
}
