#pragma once
// From (y, z) to the immersion: the boundary profile x(v), the field omega with
// omega_u = y cosh(omega) + z sinh(omega), the moving frame along u-columns and
// v-rows, and the spheres containing the v-lines.
//
// Writing X = e^omega, the transport gives X_uv = (y + z) X X_v, so along a
// column X_v(u, v) = x'(v) exp(G(u)) with G' = (y + z) X. This is how omega_v
// is carried; the quartic phi with 4 X_v^2 = phi is evaluated as a check.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "cmcaf/numerics.hpp"
#include "cmcaf/param_core.hpp"
#include "cmcaf/period_engine.hpp"
#include "cmcaf/yz_dynamics.hpp"

namespace cmcaf {

// ---------------------------------------------------------------------------
// Boundary profile: 4 x'^2 = p(x), x(0) = rho0. With
// x = rho0 + (rho1 - rho0)(1 - cos th)/2 this is th' = sqrt(Q(x))/2, th(0) = 0.

struct ProfileSample {
  double v = 0, x = 0, x_prime = 0;
};

inline ProfileSample profile_from_angle(const QuarticData& q, double v, double th) {
  const double half = 0.5 * (q.rho1 - q.rho0);
  const double x = q.rho0 + half * (1 - std::cos(th));
  const double thp = 0.5 * std::sqrt(q.positive_factor(x));
  return {v, x, half * std::sin(th) * thp};
}

// v_grid must be monotone starting anywhere; integration starts at v = 0.
inline std::vector<ProfileSample> profile_x(const ParamPoint& p, std::span<const double> v_grid,
                                            const Tolerances& tol = {}) {
  const QuarticData q = quartic(p.canonical());
  std::vector<ProfileSample> out;
  out.reserve(v_grid.size());
  if (q.double_positive_root) {
    for (double v : v_grid) out.push_back({v, q.rho0, 0.0});
    return out;
  }
  auto sys = [&q](const std::array<double, 1>& s, std::array<double, 1>& ds, double) {
    const double x = detail::map_cos(q.rho0, q.rho1, s[0]);
    ds[0] = 0.5 * std::sqrt(q.positive_factor(x));
  };
  numerics::integrate_at(sys, std::array<double, 1>{0.0}, 0.0, v_grid, tol.ode * 0.1,
                         [&](std::size_t i, const std::array<double, 1>& s) {
                           out.push_back(profile_from_angle(q, v_grid[i], s[0]));
                         });
  return out;
}

inline ProfileSample profile_x_at(const ParamPoint& p, double v, const Tolerances& tol = {}) {
  const double vs[1] = {v};
  return profile_x(p, std::span<const double>(vs, 1), tol).front();
}

// phi(u, X) = 4 X_v^2 and d(phi)/dX, with (y, z, y', z') taken at u.
struct PhiQuartic {
  double y, z, yp, zp, a_hat;

  double six_gamma_hat() const { return 6 * (y * y - z * z) - 4 * (a_hat - 0.5); }
  double operator()(double X) const {
    const double s = y + z, d = y - z;
    return (((-(1 + s * s) * X - 4 * (yp + zp)) * X + six_gamma_hat()) * X + 4 * (yp - zp)) * X -
           (1 + d * d);
  }
  double derivative(double X) const {
    const double s = y + z;
    return ((-4 * (1 + s * s) * X - 12 * (yp + zp)) * X + 2 * six_gamma_hat()) * X + 4 * (yp - zp);
  }
};

// ---------------------------------------------------------------------------
// Column ODE at fixed v: (y, y', z, z', omega, G) and optionally the frame.

struct ColumnState {
  double u = 0;
  double y = 0, y_prime = 0, z = 0, z_prime = 0;
  double omega = 0, omega_u = 0, omega_v = 0;
  Vec3 psi;
  Frame frame;
};

using ColumnVector = std::array<double, 18>;

struct ColumnSystem {
  double a_hat;
  double x_prime;  // x'(v) of the column

  void operator()(const ColumnVector& s, ColumnVector& ds, double) const {
    const double y = s[0], z = s[2], d = y * y - z * z;
    ds[0] = s[1];
    ds[1] = (a_hat - 1) * y - 2 * y * d;
    ds[2] = s[3];
    ds[3] = a_hat * z - 2 * z * d;
    const double X = std::exp(s[4]), ch = std::cosh(s[4]), sh = std::sinh(s[4]);
    ds[4] = y * ch + z * sh;
    ds[5] = (y + z) * X;
    const double wv = x_prime * std::exp(s[5]) / X;
    for (int k = 0; k < 3; ++k) {
      const double e1 = s[9 + k], e2 = s[12 + k], n = s[15 + k];
      ds[6 + k] = X * e1;
      ds[9 + k] = -wv * e2 + ch * n;
      ds[12 + k] = wv * e1;
      ds[15 + k] = -ch * e1;
    }
  }
};

namespace detail {

inline ColumnVector pack_column(const YZVector& yz, double omega, double G, const Vec3& psi, const Frame& f) {
  ColumnVector s{};
  for (int k = 0; k < 4; ++k) s[k] = yz[k];
  s[4] = omega;
  s[5] = G;
  for (int k = 0; k < 3; ++k) {
    s[6 + k] = psi[k];
    s[9 + k] = f.e1[k];
    s[12 + k] = f.e2[k];
    s[15 + k] = f.normal[k];
  }
  return s;
}

inline Frame column_frame(const ColumnVector& s) {
  return {{s[9], s[10], s[11]}, {s[12], s[13], s[14]}, {s[15], s[16], s[17]}};
}

inline void set_column_frame(ColumnVector& s, const Frame& f) {
  for (int k = 0; k < 3; ++k) {
    s[9 + k] = f.e1[k];
    s[12 + k] = f.e2[k];
    s[15 + k] = f.normal[k];
  }
}

inline ColumnState unpack_column(double u, const ColumnVector& s, double x_prime) {
  ColumnState c;
  c.u = u;
  c.y = s[0];
  c.y_prime = s[1];
  c.z = s[2];
  c.z_prime = s[3];
  c.omega = s[4];
  c.omega_u = c.y * std::cosh(c.omega) + c.z * std::sinh(c.omega);
  c.omega_v = x_prime * std::exp(s[5] - s[4]);
  c.psi = {s[6], s[7], s[8]};
  c.frame = column_frame(s);
  return c;
}

inline constexpr double kFrameDriftLimit = 1e-6;
inline constexpr int kReorthEvery = 16;

inline void reorth_column(ColumnVector& s) {
  const Frame f = column_frame(s);
  if (frame_defect(f) > kFrameDriftLimit) throw NumericError("frame drift exceeds 1e-6", frame_defect(f));
  set_column_frame(s, reorthonormalize(f));
}

// Calls obs(i, state) at every entry of an ascending grid, integrating outward
// from t = 0 in both directions.
template <class State, class System, class Observer>
void integrate_both_ways(System sys, const State& x0, std::span<const double> grid, double tol, Observer obs) {
  const auto split = std::lower_bound(grid.begin(), grid.end(), 0.0);
  const std::size_t k = static_cast<std::size_t>(split - grid.begin());
  numerics::integrate_at(sys, x0, 0.0, grid.subspan(k), tol,
                         [&](std::size_t i, State& s) { obs(k + i, s); });
  std::vector<double> back(grid.begin(), split);
  std::reverse(back.begin(), back.end());
  numerics::integrate_at(sys, x0, 0.0, std::span<const double>(back), tol,
                         [&](std::size_t i, State& s) { obs(k - 1 - i, s); });
}

}  // namespace detail

inline Frame initial_frame() { return {{0, 0, 1}, {0, -1, 0}, {1, 0, 0}}; }

// A column at fixed v stored at accepted step nodes over [u_lo, u_hi]
// (u_lo <= 0 <= u_hi); intermediate states come from re-integration.
class FrameCurve {
 public:
  FrameCurve(const ParamPoint& p, double v, double x_prime, double omega0, const Vec3& psi0, const Frame& f0,
             double u_lo, double u_hi, double tol)
      : param_(p), v_(v), x_prime_(x_prime), tol_(tol), sys_{derive_constants(p).a_hat, x_prime} {
    if (!(u_lo <= 0 && u_hi >= 0)) throw DomainError("FrameCurve: range must contain u = 0");
    const ColumnVector s0 = detail::pack_column(yz_initial(p), omega0, 0.0, psi0, f0);
    march(s0, u_hi, fwd_u_, fwd_);
    march(s0, u_lo, back_u_, back_);
  }

  double v() const { return v_; }
  double x_prime() const { return x_prime_; }
  double u_lo() const { return back_u_.back(); }
  double u_hi() const { return fwd_u_.back(); }
  const ParamPoint& param() const { return param_; }

  ColumnState at(double u) const {
    if (u > u_hi() || u < u_lo()) throw DomainError("FrameCurve: query outside integrated range");
    const auto& us = u >= 0 ? fwd_u_ : back_u_;
    const auto& xs = u >= 0 ? fwd_ : back_;
    // nodes are ordered by |u|
    std::size_t k = 0;
    {
      std::size_t lo = 0, hi = us.size();
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (std::abs(us[mid]) <= std::abs(u)) lo = mid; else hi = mid;
      }
      k = lo;
    }
    ColumnVector s = xs[k];
    if (us[k] != u) s = numerics::integrate_to(sys_, s, us[k], u, tol_ * 0.1);
    return detail::unpack_column(u, s, x_prime_);
  }

  std::size_t node_count() const { return fwd_u_.size() + back_u_.size(); }

 private:
  void march(const ColumnVector& s0, double target, std::vector<double>& us, std::vector<ColumnVector>& xs) {
    us.assign(1, 0.0);
    xs.assign(1, s0);
    if (target == 0) return;
    auto stepper = numerics::odeint::make_controlled(tol_, tol_,
                                                     numerics::odeint::runge_kutta_fehlberg78<ColumnVector>());
    ColumnVector s = s0;
    double t = 0, dt = target > 0 ? 0.01 : -0.01;
    int accepted = 0;
    std::size_t guard = 0;
    while ((target > 0 && t < target) || (target < 0 && t > target)) {
      if ((target > 0 && t + dt > target) || (target < 0 && t + dt < target)) dt = target - t;
      if (stepper.try_step(sys_, s, t, dt) == numerics::odeint::success) {
        dt = std::copysign(std::min(std::abs(dt), 0.05), dt);
        if (++accepted % detail::kReorthEvery == 0) detail::reorth_column(s);
        us.push_back(t);
        xs.push_back(s);
      }
      if (std::abs(dt) < 1e-14 || ++guard > 10000000) throw NumericError("FrameCurve: step size underflow", t);
    }
    us.back() = target;
  }

  ParamPoint param_;
  double v_, x_prime_, tol_;
  ColumnSystem sys_;
  std::vector<double> fwd_u_, back_u_;
  std::vector<ColumnVector> fwd_, back_;
};

// The seed curve v = 0 on [-u_extent, u_extent], starting from the initial frame.
inline FrameCurve integrate_profile_frame(const ParamPoint& p, double u_extent, const Tolerances& tol = {}) {
  const double omega0 = std::log(quartic(p.canonical()).rho0);
  return FrameCurve(p, 0.0, 0.0, omega0, Vec3{}, initial_frame(), -u_extent, u_extent, tol.ode);
}

// ---------------------------------------------------------------------------
// omega on a grid (u-major), columns launched from the boundary row.

struct OmegaField {
  std::vector<double> u, v;
  std::vector<double> omega, omega_u, omega_v;
  double phi_residual = 0;  // max |4 X_v^2 - phi| / max(1, |phi|)
  double phi_min = 0;

  std::size_t index(std::size_t i, std::size_t j) const { return i * v.size() + j; }
  double at(std::size_t i, std::size_t j) const { return omega[index(i, j)]; }
};

inline OmegaField build_omega(const ParamPoint& p, std::span<const double> u_grid, std::span<const double> v_grid,
                              const Tolerances& tol = {}) {
  if (!std::is_sorted(u_grid.begin(), u_grid.end()) || !std::is_sorted(v_grid.begin(), v_grid.end()))
    throw DomainError("build_omega: grids must be ascending");
  OmegaField f;
  f.u.assign(u_grid.begin(), u_grid.end());
  f.v.assign(v_grid.begin(), v_grid.end());
  const std::size_t nu = u_grid.size(), nv = v_grid.size();
  f.omega.resize(nu * nv);
  f.omega_u.resize(nu * nv);
  f.omega_v.resize(nu * nv);
  const auto prof = profile_x(p, v_grid, tol);
  const double a_hat = derive_constants(p).a_hat;
  const YZVector yz0 = yz_initial(p);
  double worst = 0, phi_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nv; ++j) {
    const ColumnSystem sys{a_hat, prof[j].x_prime};
    const ColumnVector s0 = detail::pack_column(yz0, std::log(prof[j].x), 0.0, Vec3{}, initial_frame());
    detail::integrate_both_ways(sys, s0, u_grid, tol.ode, [&](std::size_t i, ColumnVector& s) {
      const ColumnState c = detail::unpack_column(u_grid[i], s, prof[j].x_prime);
      const std::size_t k = f.index(i, j);
      f.omega[k] = c.omega;
      f.omega_u[k] = c.omega_u;
      f.omega_v[k] = c.omega_v;
      const double X = std::exp(c.omega), Xv = X * c.omega_v;
      const double phi = PhiQuartic{c.y, c.z, c.y_prime, c.z_prime, a_hat}(X);
      phi_min = std::min(phi_min, phi);
      worst = std::max(worst, std::abs(4 * Xv * Xv - phi) / std::max(1.0, std::abs(phi)));
    });
  }
  f.phi_residual = worst;
  f.phi_min = phi_min;
  if (phi_min < -1e-9) throw ConsistencyError("build_omega: phi < 0 on the grid");
  return f;
}

// Fourth-order (u) and eighth-order periodic (v) residual of
// omega_uu + omega_vv + sinh(omega) cosh(omega). The v grid must be uniform
// and cover exactly one period without the closing sample.
inline double sinh_gordon_residual(const OmegaField& f) {
  const std::size_t nu = f.u.size(), nv = f.v.size();
  if (nu < 6 || nv < 9) throw DomainError("sinh_gordon_residual: grid too small");
  const double hu = f.u[1] - f.u[0];
  const double hv = f.v[1] - f.v[0];
  std::vector<double> col(nu);
  double worst = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    for (std::size_t i = 0; i < nu; ++i) col[i] = f.at(i, j);
    for (std::size_t i = 0; i < nu; ++i) {
      const double wuu = numerics::fd_second(col, i, hu);
      const double wvv = numerics::fd_second_periodic(
          std::span<const double>(f.omega.data() + f.index(i, 0), nv), j, hv);
      const double w = col[i];
      worst = std::max(worst, std::abs(wuu + wvv + std::sinh(w) * std::cosh(w)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Rows at fixed u: X'' = phi_X / 8 together with the frame along v.

using RowVector = std::array<double, 14>;

struct RowSystem {
  PhiQuartic phi;

  void operator()(const RowVector& s, RowVector& ds, double) const {
    const double X = s[0];
    ds[0] = s[1];
    ds[1] = phi.derivative(X) / 8;
    const double ch = 0.5 * (X + 1 / X), sh = 0.5 * (X - 1 / X);
    const double wu = phi.y * ch + phi.z * sh;
    for (int k = 0; k < 3; ++k) {
      const double e1 = s[5 + k], e2 = s[8 + k], n = s[11 + k];
      ds[2 + k] = X * e2;
      ds[5 + k] = wu * e2;
      ds[8 + k] = -wu * e1 + sh * n;
      ds[11 + k] = -sh * e2;
    }
  }
};

namespace detail {

inline RowVector pack_row(double X, double Xv, const Vec3& psi, const Frame& f) {
  RowVector s{};
  s[0] = X;
  s[1] = Xv;
  for (int k = 0; k < 3; ++k) {
    s[2 + k] = psi[k];
    s[5 + k] = f.e1[k];
    s[8 + k] = f.e2[k];
    s[11 + k] = f.normal[k];
  }
  return s;
}

inline Frame row_frame(const RowVector& s) {
  return {{s[5], s[6], s[7]}, {s[8], s[9], s[10]}, {s[11], s[12], s[13]}};
}

inline void reorth_row(RowVector& s) {
  const Frame f = row_frame(s);
  if (frame_defect(f) > kFrameDriftLimit) throw NumericError("frame drift exceeds 1e-6", frame_defect(f));
  const Frame g = reorthonormalize(f);
  for (int k = 0; k < 3; ++k) {
    s[5 + k] = g.e1[k];
    s[8 + k] = g.e2[k];
    s[11 + k] = g.normal[k];
  }
}

}  // namespace detail

struct SurfacePatch {
  int n = 0;
  double sigma = 0;
  std::vector<double> u;  // ascending
  std::vector<double> v;  // v_j = j * 2 n sigma / (size - 1); the last row closes the period
  std::vector<Vec3> psi, normal;
  std::vector<double> omega, omega_u, omega_v;
  double frame_defect_max = 0;

  std::size_t index(std::size_t i, std::size_t j) const { return i * v.size() + j; }
  const Vec3& point(std::size_t i, std::size_t j) const { return psi[index(i, j)]; }
  std::size_t periodic_v_count() const { return v.size() - 1; }
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t samples) {
  if (samples < 2) throw DomainError("uniform_grid: need at least two samples");
  std::vector<double> g(samples);
  for (std::size_t k = 0; k < samples; ++k) g[k] = lo + (hi - lo) * double(k) / double(samples - 1);
  g.back() = hi;
  return g;
}

// Row at fixed u from the seed state to every v in v_grid (ascending from 0).
template <class Observer>
void sweep_row(const ParamPoint& p, const ColumnState& seed, std::span<const double> v_grid, double tol,
               Observer obs) {
  const double a_hat = derive_constants(p).a_hat;
  const RowSystem sys{PhiQuartic{seed.y, seed.z, seed.y_prime, seed.z_prime, a_hat}};
  const RowVector s0 = detail::pack_row(std::exp(seed.omega), 0.0, seed.psi, seed.frame);
  numerics::integrate_at(sys, s0, 0.0, v_grid, tol, [&](std::size_t j, RowVector& s) {
    detail::reorth_row(s);
    obs(j, s, sys);
  });
}

inline SurfacePatch sweep_v(const ParamPoint& p, const FrameCurve& seed, std::span<const double> u_grid, int n,
                            std::size_t v_samples, const Tolerances& tol = {}) {
  if (n < 1 || v_samples < 8 || v_samples % (2 * static_cast<std::size_t>(n)) != 0)
    throw DomainError("sweep_v: v_samples must be a positive multiple of 2n");
  if (!std::is_sorted(u_grid.begin(), u_grid.end())) throw DomainError("sweep_v: u grid must be ascending");
  SurfacePatch patch;
  patch.n = n;
  patch.sigma = sigma_period(p, tol);
  patch.u.assign(u_grid.begin(), u_grid.end());
  patch.v = uniform_grid(0.0, 2 * n * patch.sigma, v_samples + 1);
  const std::size_t nv = patch.v.size();
  const std::size_t total = patch.u.size() * nv;
  patch.psi.resize(total);
  patch.normal.resize(total);
  patch.omega.resize(total);
  patch.omega_u.resize(total);
  patch.omega_v.resize(total);
  for (std::size_t i = 0; i < patch.u.size(); ++i) {
    const ColumnState c = seed.at(patch.u[i]);
    sweep_row(p, c, patch.v, tol.ode, [&](std::size_t j, const RowVector& s, const RowSystem& sys) {
      const std::size_t k = patch.index(i, j);
      const double X = s[0];
      patch.psi[k] = {s[2], s[3], s[4]};
      patch.normal[k] = {s[11], s[12], s[13]};
      patch.omega[k] = std::log(X);
      patch.omega_u[k] = sys.phi.y * 0.5 * (X + 1 / X) + sys.phi.z * 0.5 * (X - 1 / X);
      patch.omega_v[k] = s[1] / X;
      patch.frame_defect_max = std::max(patch.frame_defect_max, frame_defect(detail::row_frame(s)));
    });
  }
  return patch;
}

// v first along u = 0, then u at fixed v: the opposite order to sweep_v.
struct ProbeResult {
  Vec3 psi, normal;
  double omega = 0;
};

inline ProbeResult probe_v_then_u(const ParamPoint& p, double u, double v, const Tolerances& tol = {}) {
  const FrameCurve seed0 = integrate_profile_frame(p, 0.0, tol);
  const ColumnState origin = seed0.at(0.0);
  const double vs[1] = {v};
  RowVector row{};
  sweep_row(p, origin, std::span<const double>(vs, 1), tol.ode,
            [&](std::size_t, const RowVector& s, const RowSystem&) { row = s; });
  const double X = row[0];
  const Frame f = detail::row_frame(row);
  const FrameCurve col(p, v, row[1], std::log(X), {row[2], row[3], row[4]}, f, std::min(u, 0.0),
                       std::max(u, 0.0), tol.ode);
  const ColumnState c = col.at(u);
  return {c.psi, c.frame.normal, c.omega};
}

// ---------------------------------------------------------------------------
// Spheres containing the v-lines.

struct SphereData {
  double u = 0;
  Vec3 center;
  double radius = std::numeric_limits<double>::infinity();
  double angle = 0;  // between N and the outward sphere normal
  double c3 = 0;
  bool planar = false;
};

inline SphereData sphere_data_at(const FrameCurve& seed, double u) {
  const ColumnState c = seed.at(u);
  SphereData s;
  s.u = u;
  const double d = c.z - c.y;
  const double root = std::sqrt(1 + d * d);
  if (c.y == 0) {
    s.planar = true;
    s.angle = std::acos(std::clamp(d / root, -1.0, 1.0));
    s.c3 = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.center = c.psi - (1 / c.y) * c.frame.e1 + ((c.y - c.z) / c.y) * c.frame.normal;
  s.radius = root / std::abs(c.y);
  s.angle = std::acos(std::clamp(d / (std::copysign(1.0, c.y) * root), -1.0, 1.0));
  s.c3 = s.center.z;
  return s;
}

// First zero of the third center coordinate on (0, u1); c3 is increasing there.
inline double find_u_star(const FrameCurve& seed, double u1, const Tolerances& tol = {}) {
  if (!(seed.param().gamma() > 1)) throw DomainError("find_u_star requires gamma > 1");
  if (!(u1 > 0) || u1 > seed.u_hi()) throw DomainError("find_u_star: seed curve must cover (0, u1)");
  auto c3 = [&](double u) { return sphere_data_at(seed, u).c3; };
  constexpr int kScan = 64;
  double lo = u1 / kScan;
  if (c3(lo) >= 0) throw NumericError("find_u_star: c3 already non-negative at the first scan point", lo);
  for (int k = 2; k < kScan; ++k) {
    const double u = u1 * k / kScan;
    if (c3(u) >= 0) return numerics::solve_bracketed(c3, lo, u, tol.root, 1e-15);
    lo = u;
  }
  throw NumericError("find_u_star: no sign change of c3 on (0, u1)", lo);
}

}  // namespace cmcaf
