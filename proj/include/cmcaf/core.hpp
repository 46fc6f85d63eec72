#pragma once
// Shared vocabulary: error types, tolerance configuration and a small 3-vector.

#include <array>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace cmcaf {

inline constexpr const char* kToolVersion = "cmcaf 1.0.0";

// Invalid parameters or a point outside an operation's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A numerical method failed to reach its tolerance. `estimate` carries the best
// value reached, when there is one.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what, double estimate = std::nan(""))
      : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

// Two routes to the same quantity disagree beyond tolerance.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double ode = 1e-11;   // relative/absolute ODE tolerance
  double root = 1e-12;  // bracket width for scalar roots (relative)
  double quad = 1e-14;  // quadrature refinement threshold
  double geom = 1e-6;   // normalized geometric residuals

  // Defaults overridden by CMCAF_TOL_ODE, CMCAF_TOL_ROOT, CMCAF_TOL_QUAD, CMCAF_TOL_GEOM.
  static Tolerances from_env() {
    Tolerances t;
    auto read = [](const char* name, double& slot) {
      if (const char* s = std::getenv(name)) {
        char* end = nullptr;
        double v = std::strtod(s, &end);
        if (end == s || !(v > 0) || !std::isfinite(v))
          throw DomainError(std::string("invalid value for ") + name + ": " + s);
        slot = v;
      }
    };
    read("CMCAF_TOL_ODE", t.ode);
    read("CMCAF_TOL_ROOT", t.root);
    read("CMCAF_TOL_QUAD", t.quad);
    read("CMCAF_TOL_GEOM", t.geom);
    return t;
  }
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator/(Vec3 a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalized(const Vec3& a) { return a / norm(a); }

// Orthonormal moving frame: e1, e2 unit tangents along u and v, N = e1 x e2.
struct Frame {
  Vec3 e1, e2, normal;
};

// Polar (symmetric) re-orthonormalization of a nearly orthonormal frame.
// One Newton step of the polar iteration Q <- Q (3I - Q^T Q) / 2 per call.
inline Frame reorthonormalize(const Frame& f) {
  const std::array<Vec3, 3> q{f.e1, f.e2, f.normal};
  std::array<Vec3, 3> out{};
  for (int i = 0; i < 3; ++i) {
    Vec3 acc = 1.5 * q[i];
    for (int j = 0; j < 3; ++j) acc -= 0.5 * dot(q[i], q[j]) * q[j];
    out[i] = acc;
  }
  return {out[0], out[1], out[2]};
}

inline double frame_defect(const Frame& f) {
  double d = std::abs(dot(f.e1, f.e1) - 1) + std::abs(dot(f.e2, f.e2) - 1) +
             std::abs(dot(f.normal, f.normal) - 1);
  d = std::max(d, std::abs(dot(f.e1, f.e2)));
  d = std::max(d, std::abs(dot(f.e1, f.normal)));
  d = std::max(d, std::abs(dot(f.e2, f.normal)));
  d = std::max(d, norm(cross(f.e1, f.e2) - f.normal));
  return d;
}

}  // namespace cmcaf
