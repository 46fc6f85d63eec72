#pragma once
// Triangle meshes of the periodic grid, an AABB hierarchy, exact orientation
// predicates and the queries built on them: self-intersection and distances.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cmcaf/core.hpp"

namespace cmcaf {

using Tri = std::array<std::uint32_t, 3>;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Tri> faces;
};

// Quads (i, j) -> (i+1, j) -> (i+1, j+1) -> (i, j+1) with j periodic, split
// along the (i, j)-(i+1, j+1) diagonal. Vertex (i, j) has index i * nv + j.
inline TriMesh triangulate_grid(std::span<const Vec3> points, std::size_t nu, std::size_t nv) {
  if (points.size() != nu * nv || nu < 2 || nv < 3) throw MeshError("triangulate_grid: bad grid dimensions");
  TriMesh m;
  m.vertices.assign(points.begin(), points.end());
  m.faces.reserve(2 * (nu - 1) * nv);
  for (std::size_t i = 0; i + 1 < nu; ++i)
    for (std::size_t j = 0; j < nv; ++j) {
      const auto a = static_cast<std::uint32_t>(i * nv + j);
      const auto b = static_cast<std::uint32_t>((i + 1) * nv + j);
      const auto c = static_cast<std::uint32_t>((i + 1) * nv + (j + 1) % nv);
      const auto d = static_cast<std::uint32_t>(i * nv + (j + 1) % nv);
      m.faces.push_back({a, b, c});
      m.faces.push_back({a, c, d});
    }
  return m;
}

struct ManifoldReport {
  bool ok = true;
  std::size_t boundary_edges = 0, interior_edges = 0, bad_edges = 0;
};

// Every undirected edge is used by at most two faces.
inline ManifoldReport check_manifold(const TriMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> count;
  for (const Tri& f : m.faces)
    for (int e = 0; e < 3; ++e) {
      auto a = f[e], b = f[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      ++count[{a, b}];
    }
  ManifoldReport r;
  for (const auto& [edge, c] : count) {
    if (c == 1) ++r.boundary_edges;
    else if (c == 2) ++r.interior_edges;
    else ++r.bad_edges;
  }
  r.ok = r.bad_edges == 0;
  return r;
}

// ---------------------------------------------------------------------------
// Exact predicates: a floating-point evaluation with a static error bound,
// falling back to rational arithmetic (doubles convert exactly).

namespace exact {

using Rational = boost::multiprecision::cpp_rational;

inline int sign_of(const Rational& r) { return r.sign(); }

inline int orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double adx = a.x - d.x, ady = a.y - d.y, adz = a.z - d.z;
  const double bdx = b.x - d.x, bdy = b.y - d.y, bdz = b.z - d.z;
  const double cdx = c.x - d.x, cdy = c.y - d.y, cdz = c.z - d.z;
  const double t1 = bdy * cdz - bdz * cdy, t2 = cdy * adz - cdz * ady, t3 = ady * bdz - adz * bdy;
  const double det = adx * t1 + bdx * t2 + cdx * t3;
  const double perm = std::abs(adx) * (std::abs(bdy * cdz) + std::abs(bdz * cdy)) +
                      std::abs(bdx) * (std::abs(cdy * adz) + std::abs(cdz * ady)) +
                      std::abs(cdx) * (std::abs(ady * bdz) + std::abs(adz * bdy));
  constexpr double eps = std::numeric_limits<double>::epsilon() * 0.5;
  const double bound = (7.0 + 56.0 * eps) * eps * perm;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  const Rational ax(a.x), ay(a.y), az(a.z), bx(b.x), by(b.y), bz(b.z);
  const Rational cx(c.x), cy(c.y), cz(c.z), dx(d.x), dy(d.y), dz(d.z);
  const Rational Ax = ax - dx, Ay = ay - dy, Az = az - dz;
  const Rational Bx = bx - dx, By = by - dy, Bz = bz - dz;
  const Rational Cx = cx - dx, Cy = cy - dy, Cz = cz - dz;
  const Rational r = Ax * (By * Cz - Bz * Cy) + Bx * (Cy * Az - Cz * Ay) + Cx * (Ay * Bz - Az * By);
  return sign_of(r);
}

struct Vec2 {
  double x, y;
};

inline int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double l = (a.x - c.x) * (b.y - c.y), r = (a.y - c.y) * (b.x - c.x);
  const double det = l - r;
  constexpr double eps = std::numeric_limits<double>::epsilon() * 0.5;
  const double bound = (3.0 + 16.0 * eps) * eps * (std::abs(l) + std::abs(r));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  const Rational v = (Rational(a.x) - Rational(c.x)) * (Rational(b.y) - Rational(c.y)) -
                     (Rational(a.y) - Rational(c.y)) * (Rational(b.x) - Rational(c.x));
  return sign_of(v);
}

// Closed segments in the plane.
inline bool segments_intersect_2d(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
  const int o1 = orient2d(p, q, a), o2 = orient2d(p, q, b);
  const int o3 = orient2d(a, b, p), o4 = orient2d(a, b, q);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  auto on = [](const Vec2& s, const Vec2& t, const Vec2& r) {
    return std::min(s.x, t.x) <= r.x && r.x <= std::max(s.x, t.x) && std::min(s.y, t.y) <= r.y &&
           r.y <= std::max(s.y, t.y);
  };
  if (o1 == 0 && on(p, q, a)) return true;
  if (o2 == 0 && on(p, q, b)) return true;
  if (o3 == 0 && on(a, b, p)) return true;
  if (o4 == 0 && on(a, b, q)) return true;
  return false;
}

inline bool point_in_triangle_2d(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const int o1 = orient2d(a, b, p), o2 = orient2d(b, c, p), o3 = orient2d(c, a, p);
  const bool has_neg = o1 < 0 || o2 < 0 || o3 < 0, has_pos = o1 > 0 || o2 > 0 || o3 > 0;
  return !(has_neg && has_pos);
}

inline bool coplanar_triangles_intersect(const std::array<Vec3, 3>& t, const std::array<Vec3, 3>& s) {
  // drop the dominant normal coordinate; the projection preserves incidence
  const Vec3 nrm = cross(t[1] - t[0], t[2] - t[0]);
  const int drop = std::abs(nrm.x) >= std::abs(nrm.y) && std::abs(nrm.x) >= std::abs(nrm.z)
                       ? 0
                       : (std::abs(nrm.y) >= std::abs(nrm.z) ? 1 : 2);
  auto proj = [drop](const Vec3& v) {
    return drop == 0 ? Vec2{v.y, v.z} : (drop == 1 ? Vec2{v.x, v.z} : Vec2{v.x, v.y});
  };
  std::array<Vec2, 3> a{proj(t[0]), proj(t[1]), proj(t[2])}, b{proj(s[0]), proj(s[1]), proj(s[2])};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (segments_intersect_2d(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3])) return true;
  return point_in_triangle_2d(a[0], b[0], b[1], b[2]) || point_in_triangle_2d(b[0], a[0], a[1], a[2]);
}

// Closed segment pq against the closed triangle abc, not all four coplanar.
inline bool segment_hits_triangle(const Vec3& p, const Vec3& q, const Vec3& a, const Vec3& b, const Vec3& c) {
  const int sp = orient3d(a, b, c, p), sq = orient3d(a, b, c, q);
  if (sp * sq > 0) return false;
  if (sp == 0 && sq == 0) return false;  // coplanar: handled by the caller
  const int s1 = orient3d(p, q, a, b), s2 = orient3d(p, q, b, c), s3 = orient3d(p, q, c, a);
  const bool has_neg = s1 < 0 || s2 < 0 || s3 < 0, has_pos = s1 > 0 || s2 > 0 || s3 > 0;
  return !(has_neg && has_pos);
}

inline bool triangles_intersect(const std::array<Vec3, 3>& t, const std::array<Vec3, 3>& s) {
  const int o0 = orient3d(t[0], t[1], t[2], s[0]), o1 = orient3d(t[0], t[1], t[2], s[1]),
            o2 = orient3d(t[0], t[1], t[2], s[2]);
  if ((o0 > 0 && o1 > 0 && o2 > 0) || (o0 < 0 && o1 < 0 && o2 < 0)) return false;
  if (o0 == 0 && o1 == 0 && o2 == 0) return coplanar_triangles_intersect(t, s);
  const int p0 = orient3d(s[0], s[1], s[2], t[0]), p1 = orient3d(s[0], s[1], s[2], t[1]),
            p2 = orient3d(s[0], s[1], s[2], t[2]);
  if ((p0 > 0 && p1 > 0 && p2 > 0) || (p0 < 0 && p1 < 0 && p2 < 0)) return false;
  for (int i = 0; i < 3; ++i) {
    if (segment_hits_triangle(t[i], t[(i + 1) % 3], s[0], s[1], s[2])) return true;
    if (segment_hits_triangle(s[i], s[(i + 1) % 3], t[0], t[1], t[2])) return true;
  }
  return false;
}

}  // namespace exact

// ---------------------------------------------------------------------------

struct AABB {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void grow(const Vec3& p) {
    for (int k = 0; k < 3; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  void grow(const AABB& b) {
    grow(b.lo);
    grow(b.hi);
  }
  bool overlaps(const AABB& b) const {
    for (int k = 0; k < 3; ++k)
      if (hi[k] < b.lo[k] || b.hi[k] < lo[k]) return false;
    return true;
  }
  double distance2(const Vec3& p) const {
    double d = 0;
    for (int k = 0; k < 3; ++k) {
      const double e = std::max({lo[k] - p[k], 0.0, p[k] - hi[k]});
      d += e * e;
    }
    return d;
  }
  Vec3 centroid() const { return 0.5 * (lo + hi); }
};

// Median-split hierarchy over primitive boxes.
class BVH {
 public:
  struct Node {
    AABB box;
    std::uint32_t left = 0, right = 0;  // children, or [first, first + count) for leaves
    std::uint32_t first = 0, count = 0;
  };

  BVH() = default;
  explicit BVH(std::vector<AABB> boxes) : boxes_(std::move(boxes)) {
    order_.resize(boxes_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!boxes_.empty()) build(0, static_cast<std::uint32_t>(boxes_.size()));
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& order() const { return order_; }
  const AABB& box(std::uint32_t prim) const { return boxes_[prim]; }
  bool empty() const { return nodes_.empty(); }

  // Calls visit(prim) for every primitive whose box overlaps q.
  template <class Visit>
  void query(const AABB& q, Visit&& visit) const {
    if (nodes_.empty()) return;
    std::vector<std::uint32_t> stack{0};
    while (!stack.empty()) {
      const Node& nd = nodes_[stack.back()];
      stack.pop_back();
      if (!nd.box.overlaps(q)) continue;
      if (nd.count) {
        for (std::uint32_t k = nd.first; k < nd.first + nd.count; ++k)
          if (boxes_[order_[k]].overlaps(q)) visit(order_[k]);
      } else {
        stack.push_back(nd.left);
        stack.push_back(nd.right);
      }
    }
  }

  // Branch-and-bound nearest search; dist2(prim) is the exact squared distance.
  template <class Dist2>
  std::pair<std::uint32_t, double> nearest(const Vec3& p, Dist2&& dist2) const {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    if (nodes_.empty()) return {arg, best};
    std::vector<std::pair<double, std::uint32_t>> stack{{nodes_[0].box.distance2(p), 0}};
    while (!stack.empty()) {
      const auto [d, ni] = stack.back();
      stack.pop_back();
      if (d >= best) continue;
      const Node& nd = nodes_[ni];
      if (nd.count) {
        for (std::uint32_t k = nd.first; k < nd.first + nd.count; ++k) {
          const double e = dist2(order_[k]);
          if (e < best) {
            best = e;
            arg = order_[k];
          }
        }
      } else {
        const double dl = nodes_[nd.left].box.distance2(p), dr = nodes_[nd.right].box.distance2(p);
        // push the farther child first so the nearer one is explored next
        if (dl < dr) {
          stack.emplace_back(dr, nd.right);
          stack.emplace_back(dl, nd.left);
        } else {
          stack.emplace_back(dl, nd.left);
          stack.emplace_back(dr, nd.right);
        }
      }
    }
    return {arg, best};
  }

 private:
  std::uint32_t build(std::uint32_t first, std::uint32_t last) {
    const auto idx = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    AABB box, cbox;
    for (std::uint32_t k = first; k < last; ++k) {
      box.grow(boxes_[order_[k]]);
      cbox.grow(boxes_[order_[k]].centroid());
    }
    nodes_[idx].box = box;
    if (last - first <= 4) {
      nodes_[idx].first = first;
      nodes_[idx].count = last - first;
      return idx;
    }
    int axis = 0;
    for (int k = 1; k < 3; ++k)
      if (cbox.hi[k] - cbox.lo[k] > cbox.hi[axis] - cbox.lo[axis]) axis = k;
    const std::uint32_t mid = first + (last - first) / 2;
    std::nth_element(order_.begin() + first, order_.begin() + mid, order_.begin() + last,
                     [&](std::uint32_t a, std::uint32_t b) {
                       return boxes_[a].centroid()[axis] < boxes_[b].centroid()[axis];
                     });
    const std::uint32_t l = build(first, mid);
    const std::uint32_t r = build(mid, last);
    nodes_[idx].left = l;
    nodes_[idx].right = r;
    return idx;
  }

  std::vector<AABB> boxes_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline AABB triangle_box(const TriMesh& m, std::size_t f) {
  AABB b;
  for (auto v : m.faces[f]) b.grow(m.vertices[v]);
  return b;
}

inline BVH build_triangle_bvh(const TriMesh& m) {
  std::vector<AABB> boxes(m.faces.size());
  for (std::size_t f = 0; f < m.faces.size(); ++f) boxes[f] = triangle_box(m, f);
  return BVH(std::move(boxes));
}

inline BVH build_point_bvh(std::span<const Vec3> pts) {
  std::vector<AABB> boxes(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) boxes[k].grow(pts[k]);
  return BVH(std::move(boxes));
}

struct IntersectionReport {
  std::size_t pairs = 0;  // intersecting pairs of triangles sharing no vertex
  std::size_t candidates = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> examples;  // first few pairs
};

inline IntersectionReport self_intersections(const TriMesh& m, std::size_t keep_examples = 8) {
  for (std::size_t f = 0; f < m.faces.size(); ++f) {
    const Tri& t = m.faces[f];
    const Vec3 nrm = cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]);
    if (!(norm(nrm) > 0)) throw MeshError("self_intersections: degenerate triangle");
  }
  const BVH bvh = build_triangle_bvh(m);
  IntersectionReport r;
  for (std::uint32_t f = 0; f < m.faces.size(); ++f) {
    const Tri& t = m.faces[f];
    const std::array<Vec3, 3> tv{m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]};
    bvh.query(bvh.box(f), [&](std::uint32_t g) {
      if (g <= f) return;
      const Tri& s = m.faces[g];
      for (auto a : t)
        for (auto b : s)
          if (a == b) return;
      ++r.candidates;
      const std::array<Vec3, 3> sv{m.vertices[s[0]], m.vertices[s[1]], m.vertices[s[2]]};
      if (exact::triangles_intersect(tv, sv)) {
        ++r.pairs;
        if (r.examples.size() < keep_examples) r.examples.emplace_back(f, g);
      }
    });
  }
  return r;
}

// Squared distance from p to the closed triangle abc.
inline double point_triangle_distance2(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = dot(ab, ap), d2 = dot(ac, ap);
  if (d1 <= 0 && d2 <= 0) return dot(ap, ap);
  const Vec3 bp = p - b;
  const double d3 = dot(ab, bp), d4 = dot(ac, bp);
  if (d3 >= 0 && d4 <= d3) return dot(bp, bp);
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) {
    const Vec3 q = a + (d1 / (d1 - d3)) * ab;
    return dot(p - q, p - q);
  }
  const Vec3 cp = p - c;
  const double d5 = dot(ab, cp), d6 = dot(ac, cp);
  if (d6 >= 0 && d5 <= d6) return dot(cp, cp);
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) {
    const Vec3 q = a + (d2 / (d2 - d6)) * ac;
    return dot(p - q, p - q);
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
    const Vec3 q = b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    return dot(p - q, p - q);
  }
  const double denom = 1 / (va + vb + vc);
  const Vec3 q = a + (vb * denom) * ab + (vc * denom) * ac;
  return dot(p - q, p - q);
}

inline double distance_to_mesh(const TriMesh& m, const BVH& bvh, const Vec3& p) {
  const auto [f, d2] = bvh.nearest(p, [&](std::uint32_t g) {
    const Tri& t = m.faces[g];
    return point_triangle_distance2(p, m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]]);
  });
  (void)f;
  return std::sqrt(d2);
}

inline double distance_to_points(std::span<const Vec3> pts, const BVH& bvh, const Vec3& p) {
  const auto [k, d2] = bvh.nearest(p, [&](std::uint32_t g) { return dot(pts[g] - p, pts[g] - p); });
  (void)k;
  return std::sqrt(d2);
}

}  // namespace cmcaf
