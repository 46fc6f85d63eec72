#pragma once
// The family pipeline: the arc beta -> (1, beta, gamma_{-1/n}(1, beta)), the
// roots beta1 and beta*, continuation in alpha = 1 + mu, and assembly of the
// rescaled annulus.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cmcaf/param_core.hpp"
#include "cmcaf/period_engine.hpp"
#include "cmcaf/surface_integrator.hpp"
#include "cmcaf/yz_dynamics.hpp"

namespace cmcaf {

inline ParamPoint level_point(int n, double alpha, double beta, const Tolerances& tol = {}) {
  if (n < 2) throw DomainError("level_point: n must be at least 2");
  return {alpha, beta, gamma_level(-1.0 / n, alpha, beta, tol)};
}

inline ParamPoint upsilon(int n, double beta, const Tolerances& tol = {}) {
  if (!(beta >= 1)) throw DomainError("upsilon: beta must be >= 1");
  return level_point(n, 1.0, beta, tol);
}

inline double find_beta1(int n, const Tolerances& tol = {}) {
  auto L = [&](double b) { return region_membership(upsilon(n, b, tol)).L_aux; };
  if (!(L(1.0) > 0)) throw NumericError("find_beta1: L_aux(1) is not positive");
  double lo = 1, hi = 2;
  int doublings = 0;
  while (L(hi) > 0) {
    lo = hi;
    hi *= 2;
    if (++doublings > 60) throw NumericError("find_beta1: bracket growth failed", hi);
  }
  return numerics::solve_bracketed(L, lo, hi, 1e-15, 1e-15);
}

// u*, tau and u1 at a point of W.
struct MatchData {
  double u_star = 0, tau = 0, u1 = 0;
  double mismatch() const { return u_star - tau; }
};

inline MatchData match_data(const ParamPoint& p, const Tolerances& tol = {}) {
  const YZTrajectory traj = integrate_yz(p, tol);
  if (!traj.u1) throw NumericError("match_data: u1 not found");
  if (!traj.tau) throw DomainError("match_data: point outside W");
  const FrameCurve seed = integrate_profile_frame(p, *traj.u1, tol);
  return {find_u_star(seed, *traj.u1, tol), *traj.tau, *traj.u1};
}

struct BetaStar {
  double beta = 0;
  double beta1 = 0;
  std::vector<std::pair<double, double>> scan;  // (beta, f)
};

// f(beta) = u* - tau along the arc; the first sign change from - to + on (1, beta1).
inline BetaStar find_beta_star(int n, const Tolerances& tol = {}) {
  BetaStar out;
  out.beta1 = find_beta1(n, tol);
  auto f = [&](double b) { return match_data(upsilon(n, b, tol), tol).mismatch(); };
  constexpr int kScan = 16;
  for (int k = 0; k < kScan; ++k) {
    const double b = 1 + (out.beta1 - 1) * k / kScan;
    out.scan.emplace_back(b, f(b));
    if (k > 0 && out.scan[k - 1].second < 0 && out.scan[k].second >= 0) {
      out.beta = numerics::solve_bracketed(f, out.scan[k - 1].first, b, 1e-14, 1e-14);
      if (std::abs(f(out.beta)) > 1e-8) throw NumericError("find_beta_star: polish missed 1e-8", out.beta);
      return out;
    }
  }
  std::ostringstream os;
  os << "find_beta_star: no sign change on (1, beta1); scan:";
  for (const auto& [b, v] : out.scan) os << " (" << b << ", " << v << ")";
  throw NumericError(os.str());
}

struct FamilyPoint {
  int n = 2;
  double mu = 0;
  ParamPoint param{1, 1, 1};
  double u_star = 0, tau = 0, u1 = 0, sigma = 0, per = 0;
};

inline FamilyPoint make_family_point(int n, double mu, const ParamPoint& p, const MatchData& m,
                                     const Tolerances& tol = {}) {
  FamilyPoint fp;
  fp.n = n;
  fp.mu = mu;
  fp.param = p;
  fp.u_star = m.u_star;
  fp.tau = m.tau;
  fp.u1 = m.u1;
  fp.sigma = sigma_period(p, tol);
  fp.per = per_map(p, tol);
  return fp;
}

struct FamilyBranch {
  std::vector<FamilyPoint> points;
  bool truncated = false;
  std::string notice;
};

// Secant predictor in beta, bracketed corrector of u* - tau at fixed alpha.
// A failed corrector halves the step towards the next requested mu; three
// consecutive halvings end the branch.
inline FamilyBranch continue_family(int n, const std::vector<double>& mu_list, const Tolerances& tol = {}) {
  if (mu_list.empty() || mu_list.front() != 0) throw DomainError("continue_family: mu_list must start at 0");
  for (std::size_t k = 1; k < mu_list.size(); ++k)
    if (!(mu_list[k] > mu_list[k - 1])) throw DomainError("continue_family: mu_list must increase");
  FamilyBranch branch;
  const BetaStar bs = find_beta_star(n, tol);
  const ParamPoint p0 = upsilon(n, bs.beta, tol);
  branch.points.push_back(make_family_point(n, 0.0, p0, match_data(p0, tol), tol));

  std::vector<std::pair<double, double>> accepted{{0.0, bs.beta}};  // (mu, beta), including substeps
  auto corrector = [&](double mu, double beta_pred, double width) -> std::optional<double> {
    const double alpha = 1 + mu;
    auto F = [&](double b) { return match_data(level_point(n, alpha, b, tol), tol).mismatch(); };
    try {
      double lo = std::max(alpha, beta_pred - width), hi = beta_pred + width;
      double flo = F(lo), fhi = F(hi);
      for (int grow = 0; (flo > 0) == (fhi > 0); ++grow) {
        if (grow == 3) return std::nullopt;
        width *= 2;
        lo = std::max(alpha, beta_pred - width);
        hi = beta_pred + width;
        flo = F(lo);
        fhi = F(hi);
      }
      const double b = numerics::solve_bracketed(F, lo, hi, 1e-14, 1e-14);
      if (std::abs(F(b)) > 1e-8) return std::nullopt;
      return b;
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  for (std::size_t k = 1; k < mu_list.size(); ++k) {
    const double target = mu_list[k];
    int halvings = 0;
    while (accepted.back().first < target) {
      const auto [mu_a, beta_a] = accepted.back();
      double mu_next = target;
      for (int h = 0; h < halvings; ++h) mu_next = 0.5 * (mu_a + mu_next);
      double pred = beta_a, width = 1e-2 * std::max(1.0, beta_a);
      if (accepted.size() >= 2) {
        const auto [mu_b, beta_b] = accepted[accepted.size() - 2];
        const double slope = (beta_a - beta_b) / (mu_a - mu_b);
        pred = beta_a + slope * (mu_next - mu_a);
        width = std::max(1e-4 * beta_a, 2 * std::abs(slope * (mu_next - mu_a)));
      }
      const auto b = corrector(mu_next, pred, width);
      if (!b) {
        if (++halvings > 3) {
          branch.truncated = true;
          std::ostringstream os;
          os << "corrector failed beyond mu = " << mu_a << " after 3 step halvings towards mu = " << target;
          branch.notice = os.str();
          return branch;
        }
        continue;
      }
      accepted.emplace_back(mu_next, *b);
      halvings = 0;
    }
    const ParamPoint p = level_point(n, 1 + target, accepted.back().second, tol);
    branch.points.push_back(make_family_point(n, target, p, match_data(p, tol), tol));
  }
  return branch;
}

// ---------------------------------------------------------------------------

struct AssemblyOptions {
  std::size_t u_samples = 257;
  std::size_t v_samples = 0;  // 0: 512 n
  double u_extent_factor = 1.0;
};

struct RowSphere {
  Vec3 center;  // rescaled coordinates
  double radius = 0;
  double cos_angle = 0;
  bool planar = false;
};

struct AnnulusModel {
  FamilyPoint fp;
  std::size_t nu = 0, nv = 0;  // nv excludes the closing row
  std::vector<double> u;
  std::vector<Vec3> points;   // rescaled, u-major, nu * nv
  std::vector<Vec3> normals;  // unit normals, same layout
  std::vector<double> omega;  // empty when loaded from files
  std::vector<RowSphere> spheres;
  Vec3 center;                 // boundary-sphere center before rescaling
  double boundary_radius = 0;  // R
  double mean_curvature_rescaled = 0;
  double closure_residual = 0;  // max |psi(u, 2 n sigma) - psi(u, 0)| / diameter
  double u_extent_factor = 1.0;
  std::optional<double> necksize_unscaled;

  std::size_t index(std::size_t i, std::size_t j) const { return i * nv + j; }
  const Vec3& point(std::size_t i, std::size_t j) const { return points[index(i, j)]; }
  const Vec3& normal(std::size_t i, std::size_t j) const { return normals[index(i, j)]; }
  std::size_t middle_row() const { return nu / 2; }
};

// Analytic row spheres in the coordinates of a model with the given rescaling.
inline std::vector<RowSphere> row_spheres(const FrameCurve& seed, std::span<const double> u, const Vec3& center,
                                          double R) {
  std::vector<RowSphere> out;
  out.reserve(u.size());
  for (double ui : u) {
    const SphereData s = sphere_data_at(seed, ui);
    RowSphere r;
    r.planar = s.planar;
    r.cos_angle = std::cos(s.angle);
    if (!s.planar) {
      r.center = (s.center - center) / R;
      r.radius = s.radius / R;
    }
    out.push_back(r);
  }
  return out;
}

inline AnnulusModel assemble_annulus(const FamilyPoint& fp, const AssemblyOptions& opt = {},
                                     const Tolerances& tol = {}) {
  const int n = fp.n;
  const std::size_t J = opt.v_samples ? opt.v_samples : 512 * static_cast<std::size_t>(n);
  if (opt.u_samples < 5 || opt.u_samples % 2 == 0) throw DomainError("assemble_annulus: u_samples must be odd, >= 5");
  if (!(opt.u_extent_factor > 0)) throw DomainError("assemble_annulus: u_extent_factor must be positive");
  const ParamPoint& p = fp.param;
  const double ext = opt.u_extent_factor * fp.u_star;
  const FrameCurve seed = integrate_profile_frame(p, std::max(ext, fp.u1), tol);
  const std::vector<double> ugrid = uniform_grid(-ext, ext, opt.u_samples);
  const SurfacePatch patch = sweep_v(p, seed, ugrid, n, J, tol);

  AnnulusModel m;
  m.fp = fp;
  m.nu = ugrid.size();
  m.nv = J;
  m.u = ugrid;
  m.u_extent_factor = opt.u_extent_factor;
  const SphereData top = sphere_data_at(seed, fp.u_star);
  const SphereData bottom = sphere_data_at(seed, -fp.u_star);
  if (top.planar || norm(top.center - bottom.center) > 1e-6 * top.radius ||
      std::abs(top.radius - bottom.radius) > 1e-6 * top.radius)
    throw ConsistencyError("assemble_annulus: boundary rows are not on one sphere");
  m.center = top.center;
  m.boundary_radius = top.radius;
  m.mean_curvature_rescaled = 0.5 * top.radius;
  const double R = top.radius;

  m.points.resize(m.nu * J);
  m.normals.resize(m.nu * J);
  m.omega.resize(m.nu * J);
  double diam = 0;
  for (std::size_t i = 0; i < m.nu; ++i)
    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t k = patch.index(i, j);
      m.points[m.index(i, j)] = (patch.psi[k] - m.center) / R;
      m.normals[m.index(i, j)] = patch.normal[k];
      m.omega[m.index(i, j)] = patch.omega[k];
      diam = std::max(diam, norm(m.points[m.index(i, j)]));
    }
  diam *= 2;
  for (std::size_t i = 0; i < m.nu; ++i)
    m.closure_residual = std::max(
        m.closure_residual, norm(patch.point(i, J) - patch.point(i, 0)) / R / diam);
  m.spheres = row_spheres(seed, m.u, m.center, R);

  if (fp.mu == 0) {
    // neck: the u = 0 row is a circle about the vertical line through the center
    const std::size_t i0 = m.middle_row();
    double acc = 0;
    for (std::size_t j = 0; j < J; ++j) {
      const Vec3 d = patch.point(i0, j) - m.center;
      acc += std::hypot(d.x, d.y);
    }
    m.necksize_unscaled = acc / double(J);
  }
  return m;
}

}  // namespace cmcaf
