#pragma once
// Checks run on an assembled (rescaled) annulus. Each returns a Verdict with
// the measured residual. Upper-bound verdicts pass when residual <= tolerance;
// lower-bound verdicts (a probe that must fail) pass when residual > tolerance.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cmcaf/family_solver.hpp"
#include "cmcaf/mesh.hpp"
#include "cmcaf/numerics.hpp"

namespace cmcaf {

struct Verdict {
  std::string name;
  double residual = 0;
  double tolerance = 0;
  bool pass = false;
  bool lower_bound = false;
  std::string details;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

inline Verdict make_verdict(std::string name, double residual, double tolerance, std::string details = {},
                            bool lower_bound = false) {
  Verdict v;
  v.name = std::move(name);
  v.residual = residual;
  v.tolerance = tolerance;
  v.lower_bound = lower_bound;
  v.pass = lower_bound ? residual > tolerance : residual <= tolerance;
  v.details = std::move(details);
  return v;
}

struct VerifyOptions {
  double analytic_tol = 1e-6;      // sphere / boundary residuals (normalized)
  double collinear_tol = 1e-7;     // horizontal spread of the sphere centers
  double symmetry_tol = 1e-5;      // Hausdorff residual / diameter
  double rotation_probe = 1e-3;    // the pi/n rotation must exceed this for mu > 0
  double rotational_tol = 1e-5;    // mu = 0: random rotations about the axis (mesh distance)
  double curvature_tol = 0.02;     // relative deviation of the discrete mean curvature
  double turning_tol = 1e-4;
  std::uint64_t seed = 20240917;
};

namespace detail {

inline double model_diameter(const AnnulusModel& m) {
  AABB b;
  for (const Vec3& p : m.points) b.grow(p);
  return norm(b.hi - b.lo);
}

// Largest distance from the mapped vertices to the original vertex set.
template <class Map>
double vertex_hausdorff(const AnnulusModel& m, const BVH& pts, Map&& map) {
  double worst = 0;
  for (const Vec3& p : m.points) worst = std::max(worst, distance_to_points(m.points, pts, map(p)));
  return worst;
}

template <class Map>
double mesh_hausdorff(const AnnulusModel& m, const TriMesh& mesh, const BVH& tris, Map&& map) {
  double worst = 0;
  for (const Vec3& p : m.points) worst = std::max(worst, distance_to_mesh(mesh, tris, map(p)));
  return worst;
}

inline Vec3 rotate_z(const Vec3& p, double t) {
  const double c = std::cos(t), s = std::sin(t);
  return {c * p.x - s * p.y, s * p.x + c * p.y, p.z};
}

// Reflection through the vertical plane containing the x3-axis and (cos t, sin t, 0).
inline Vec3 reflect_vertical(const Vec3& p, double t) {
  const double c = std::cos(2 * t), s = std::sin(2 * t);
  return {c * p.x + s * p.y, s * p.x - c * p.y, p.z};
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace detail

inline Verdict check_free_boundary(const AnnulusModel& m, const VerifyOptions& opt = {}) {
  double worst_r = 0, worst_n = 0, rmin = 1e300, rmax = 0;
  for (std::size_t i : {std::size_t{0}, m.nu - 1})
    for (std::size_t j = 0; j < m.nv; ++j) {
      const Vec3& p = m.point(i, j);
      const double r = norm(p);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      worst_r = std::max(worst_r, std::abs(r - 1));
      worst_n = std::max(worst_n, std::abs(dot(m.normal(i, j), p)));
    }
  return make_verdict("free_boundary", std::max(worst_r, worst_n), opt.analytic_tol,
                      "max||psi|-1|=" + detail::fmt(worst_r) + " max|<N,psi>|=" + detail::fmt(worst_n) +
                          " radius_spread=" + detail::fmt(rmax - rmin));
}

inline std::vector<Verdict> check_symmetry(const AnnulusModel& m, const VerifyOptions& opt = {}) {
  using std::numbers::pi;
  const int n = m.fp.n;
  const double diam = detail::model_diameter(m);
  const BVH pts = build_point_bvh(m.points);
  std::vector<Verdict> out;

  const double horiz = detail::vertex_hausdorff(m, pts, [](const Vec3& p) { return Vec3{p.x, p.y, -p.z}; });
  double planes = 0;
  std::string pd;
  for (int k = 0; k < n; ++k) {
    const double t = k * pi / n;
    const double r = detail::vertex_hausdorff(m, pts, [t](const Vec3& p) { return detail::reflect_vertical(p, t); });
    planes = std::max(planes, r);
    pd += " plane" + std::to_string(k) + "=" + detail::fmt(r / diam);
  }
  out.push_back(make_verdict("symmetry_reflections", std::max(horiz, planes) / diam, opt.symmetry_tol,
                             "x3=" + detail::fmt(horiz / diam) + pd + " order=" + std::to_string(4 * n)));

  const double rot = 2 * pi / n;
  const double r2 = std::max(
      detail::vertex_hausdorff(m, pts, [rot](const Vec3& p) { return detail::rotate_z(p, rot); }),
      detail::vertex_hausdorff(m, pts, [rot](const Vec3& p) { return detail::rotate_z(p, -rot); }));
  out.push_back(make_verdict("symmetry_rotation_2pi_n", r2 / diam, opt.symmetry_tol));

  const TriMesh mesh = triangulate_grid(m.points, m.nu, m.nv);
  const BVH tris = build_triangle_bvh(mesh);
  auto rot_residual = [&](double t) {
    return std::max(detail::mesh_hausdorff(m, mesh, tris, [t](const Vec3& p) { return detail::rotate_z(p, t); }),
                    detail::mesh_hausdorff(m, mesh, tris, [t](const Vec3& p) { return detail::rotate_z(p, -t); })) /
           diam;
  };
  if (m.fp.mu > 0) {
    out.push_back(make_verdict("symmetry_no_rotation_pi_n", rot_residual(pi / n), opt.rotation_probe,
                               "rotation by pi/n must not be a symmetry", true));
  } else {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> angle(0.0, 2 * pi);
    double worst = 0;
    std::string d;
    for (int k = 0; k < 3; ++k) {
      const double t = angle(rng);
      const double r = rot_residual(t);
      worst = std::max(worst, r);
      d += " t=" + detail::fmt(t) + ":" + detail::fmt(r);
    }
    out.push_back(make_verdict("symmetry_rotational", worst, opt.rotational_tol, d));
  }
  return out;
}

struct TurningData {
  double total = 0;
  std::vector<double> segments;  // turning per v-interval of length sigma
  int index = 0;
};

inline TurningData row_turning(const AnnulusModel& m, std::size_t row) {
  const std::size_t nv = m.nv;
  const double h = 1.0;  // the scale of the parameter does not affect angles
  std::vector<double> cx(nv), cy(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    cx[j] = m.point(row, j).x;
    cy[j] = m.point(row, j).y;
  }
  std::vector<double> tx(nv), ty(nv);
  for (std::size_t j = 0; j < nv; ++j) {
    tx[j] = numerics::fd_first_periodic(cx, j, h);
    ty[j] = numerics::fd_first_periodic(cy, j, h);
    if (!(std::hypot(tx[j], ty[j]) > 0)) throw NumericError("row_turning: degenerate tangent");
  }
  TurningData td;
  const std::size_t per_seg = nv / (2 * static_cast<std::size_t>(m.fp.n));
  double seg = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    const std::size_t k = (j + 1) % nv;
    const double a = std::atan2(tx[j] * ty[k] - ty[j] * tx[k], tx[j] * tx[k] + ty[j] * ty[k]);
    td.total += a;
    seg += a;
    if ((j + 1) % per_seg == 0) {
      td.segments.push_back(seg);
      seg = 0;
    }
  }
  td.index = static_cast<int>(std::lround(td.total / (2 * std::numbers::pi)));
  return td;
}

inline Verdict check_rotation_index(const AnnulusModel& m, const VerifyOptions& opt = {}) {
  using std::numbers::pi;
  const TurningData td = row_turning(m, m.middle_row());
  double seg_dev = 0;
  bool seg_ok = true;
  for (double s : td.segments) {
    seg_ok = seg_ok && s > -pi && s < pi;
    seg_dev = std::max(seg_dev, std::abs(s + pi / m.fp.n));
  }
  const double residual = std::abs(td.total + 2 * pi);
  Verdict v = make_verdict("rotation_index", residual, opt.turning_tol,
                           "index=" + std::to_string(td.index) + " total=" + detail::fmt(td.total) +
                               " max|segment+pi/n|=" + detail::fmt(seg_dev));
  v.pass = v.pass && td.index == -1 && seg_ok;
  return v;
}

inline Verdict check_embedded(const AnnulusModel& m) {
  const TriMesh mesh = triangulate_grid(m.points, m.nu, m.nv);
  const IntersectionReport r = self_intersections(mesh);
  return make_verdict("embedded", double(r.pairs), 0.0,
                      "intersecting_pairs=" + std::to_string(r.pairs) + " candidates=" + std::to_string(r.candidates));
}

struct DiscreteCurvature {
  std::vector<double> mean;      // per vertex, interior rows only (others NaN)
  std::vector<double> gaussian;  // angle defect / mixed area
};

inline DiscreteCurvature discrete_curvature(const AnnulusModel& m) {
  const TriMesh mesh = triangulate_grid(m.points, m.nu, m.nv);
  const std::size_t nvx = mesh.vertices.size();
  std::vector<Vec3> lap(nvx);
  std::vector<double> area(nvx, 0.0), angle(nvx, 0.0);
  for (const Tri& f : mesh.faces) {
    const Vec3 P[3] = {mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]};
    const double A = 0.5 * norm(cross(P[1] - P[0], P[2] - P[0]));
    double cot[3], ang[3];
    for (int k = 0; k < 3; ++k) {
      const Vec3 e1 = P[(k + 1) % 3] - P[k], e2 = P[(k + 2) % 3] - P[k];
      cot[k] = dot(e1, e2) / norm(cross(e1, e2));
      ang[k] = std::atan2(norm(cross(e1, e2)), dot(e1, e2));
    }
    for (int k = 0; k < 3; ++k) {
      const int a = (k + 1) % 3, b = (k + 2) % 3;  // edge opposite corner k
      lap[f[a]] += 0.5 * cot[k] * (P[b] - P[a]);
      lap[f[b]] += 0.5 * cot[k] * (P[a] - P[b]);
      angle[f[k]] += ang[k];
    }
    const bool obtuse = ang[0] > std::numbers::pi / 2 || ang[1] > std::numbers::pi / 2 || ang[2] > std::numbers::pi / 2;
    for (int k = 0; k < 3; ++k) {
      if (!obtuse) {
        const int a = (k + 1) % 3, b = (k + 2) % 3;
        const Vec3 ea = P[a] - P[k], eb = P[b] - P[k];
        area[f[k]] += (dot(ea, ea) * cot[b] + dot(eb, eb) * cot[a]) / 8;
      } else {
        area[f[k]] += ang[k] > std::numbers::pi / 2 ? A / 2 : A / 4;
      }
    }
  }
  DiscreteCurvature dc;
  dc.mean.assign(nvx, std::nan(""));
  dc.gaussian.assign(nvx, std::nan(""));
  for (std::size_t i = 1; i + 1 < m.nu; ++i)
    for (std::size_t j = 0; j < m.nv; ++j) {
      const std::size_t k = m.index(i, j);
      dc.mean[k] = 0.5 * dot(lap[k] / area[k], m.normals[k]);
      dc.gaussian[k] = (2 * std::numbers::pi - angle[k]) / area[k];
    }
  return dc;
}

inline std::vector<Verdict> check_mean_curvature(const AnnulusModel& m, const VerifyOptions& opt = {}) {
  const DiscreteCurvature dc = discrete_curvature(m);
  const double H = m.mean_curvature_rescaled;
  double worst = 0, kmax = -1e300;
  for (std::size_t k = 0; k < dc.mean.size(); ++k) {
    if (std::isnan(dc.mean[k])) continue;
    worst = std::max(worst, std::abs(dc.mean[k] - H) / H);
    kmax = std::max(kmax, dc.gaussian[k]);
  }
  std::vector<Verdict> out;
  const double scaling = std::abs(H - 0.5 * m.boundary_radius) / H;
  Verdict v = make_verdict("mean_curvature", worst, opt.curvature_tol,
                           "declared_H=" + detail::fmt(H) + " R/2 mismatch=" + detail::fmt(scaling));
  v.pass = v.pass && scaling <= 1e-12;
  out.push_back(v);
  std::string d = "max discrete K=" + detail::fmt(kmax);
  if (!m.omega.empty()) {
    double wmax = -1e300;
    for (double w : m.omega) wmax = std::max(wmax, w);
    d += " max omega=" + detail::fmt(wmax);
  }
  out.push_back(make_verdict("gaussian_curvature_negative", kmax, 0.0, d));
  return out;
}

inline std::vector<Verdict> check_spherical_lines(const AnnulusModel& m, const VerifyOptions& opt = {}) {
  double dist = 0, ang = 0, planar = 0;
  double cx_lo = 1e300, cx_hi = -1e300, cy_lo = 1e300, cy_hi = -1e300;
  for (std::size_t i = 0; i < m.nu; ++i) {
    const RowSphere& s = m.spheres[i];
    for (std::size_t j = 0; j < m.nv; ++j) {
      const Vec3& p = m.point(i, j);
      const Vec3& N = m.normal(i, j);
      if (s.planar) {
        planar = std::max({planar, std::abs(p.z), std::abs(N.z)});
      } else {
        const double r = norm(p - s.center);
        dist = std::max(dist, std::abs(r - s.radius) / s.radius);
        ang = std::max(ang, std::abs(dot(N, (p - s.center) / r) - s.cos_angle));
      }
    }
    if (!s.planar) {
      cx_lo = std::min(cx_lo, s.center.x);
      cx_hi = std::max(cx_hi, s.center.x);
      cy_lo = std::min(cy_lo, s.center.y);
      cy_hi = std::max(cy_hi, s.center.y);
    }
  }
  std::vector<Verdict> out;
  out.push_back(make_verdict("spherical_lines", std::max({dist, ang, planar}), opt.analytic_tol,
                             "distance=" + detail::fmt(dist) + " angle=" + detail::fmt(ang) +
                                 " planar_row=" + detail::fmt(planar)));
  out.push_back(make_verdict("sphere_centers_collinear", std::max(cx_hi - cx_lo, cy_hi - cy_lo), opt.collinear_tol));
  double orth = 0;
  for (std::size_t i : {std::size_t{0}, m.nu - 1}) {
    orth = std::max(orth, std::abs(m.spheres[i].cos_angle));
    for (std::size_t j = 0; j < m.nv; ++j) {
      const RowSphere& s = m.spheres[i];
      if (s.planar) continue;
      const Vec3 d = m.point(i, j) - s.center;
      orth = std::max(orth, std::abs(dot(m.normal(i, j), d)) / norm(d));
    }
  }
  out.push_back(make_verdict("boundary_orthogonal", orth, opt.analytic_tol));
  return out;
}

inline std::vector<Verdict> verify_all(const AnnulusModel& m, const VerifyOptions& opt = {}) {
  std::vector<Verdict> out;
  out.push_back(check_free_boundary(m, opt));
  out.push_back(make_verdict("closure", m.closure_residual, opt.analytic_tol));
  for (auto& v : check_symmetry(m, opt)) out.push_back(std::move(v));
  out.push_back(check_rotation_index(m, opt));
  out.push_back(check_embedded(m));
  for (auto& v : check_mean_curvature(m, opt)) out.push_back(std::move(v));
  for (auto& v : check_spherical_lines(m, opt)) out.push_back(std::move(v));
  return out;
}

inline bool all_pass(const std::vector<Verdict>& vs) {
  for (const auto& v : vs)
    if (!v.pass) return false;
  return true;
}

}  // namespace cmcaf
