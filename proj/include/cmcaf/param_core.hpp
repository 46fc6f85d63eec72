#pragma once
// Parameter-domain bookkeeping: the point (alpha, beta, gamma), the constants
// A, B, C, a_hat, the quartic p, the cubic q and region membership.

#include <array>
#include <cmath>
#include <sstream>

#include "cmcaf/core.hpp"

namespace cmcaf {

class ParamPoint {
 public:
  ParamPoint(double alpha, double beta, double gamma) : alpha_(alpha), beta_(beta), gamma_(gamma) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma) || !(alpha > 0) ||
        !(beta > 0) || !(gamma >= 1)) {
      std::ostringstream os;
      os << "invalid parameter point (" << alpha << ", " << beta << ", " << gamma
         << "): need alpha, beta > 0 finite and gamma >= 1";
      throw DomainError(os.str());
    }
  }

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double gamma() const noexcept { return gamma_; }

  // Representative with alpha, beta >= 1; every construction quantity is
  // invariant under alpha -> 1/alpha and beta -> 1/beta.
  ParamPoint canonical() const {
    return {alpha_ < 1 ? 1 / alpha_ : alpha_, beta_ < 1 ? 1 / beta_ : beta_, gamma_};
  }

  // Structural degeneracy tests (exact comparisons on the parameters).
  bool alpha_is_one() const noexcept { return alpha_ == 1.0; }
  bool beta_is_one() const noexcept { return beta_ == 1.0; }
  bool alpha_equals_beta() const {
    const ParamPoint c = canonical();
    return c.alpha_ == c.beta_;
  }

  friend bool operator==(const ParamPoint&, const ParamPoint&) = default;

 private:
  double alpha_, beta_, gamma_;
};

struct DerivedConstants {
  double A, B, C, a_hat;
  // A - 1 and B - 1 evaluated without cancellation.
  double A_minus_one, B_minus_one;
};

inline DerivedConstants derive_constants(const ParamPoint& p) {
  const double a = p.alpha(), b = p.beta(), g = p.gamma();
  DerivedConstants d{};
  d.A = 0.5 * (a + 1 / a);
  d.B = 0.5 * (b + 1 / b);
  d.C = 0.5 * (g - 1 / g);
  d.a_hat = 1 - d.A * d.B + d.C * d.C;
  d.A_minus_one = (a - 1) * (a - 1) / (2 * a);
  d.B_minus_one = (b - 1) * (b - 1) / (2 * b);
  return d;
}

// p(x) = -(x - alpha/gamma)(x - 1/(alpha gamma))(x + beta gamma)(x + gamma/beta)
struct QuarticData {
  std::array<double, 5> coeffs{};  // ascending powers
  double rho0 = 0, rho1 = 0;       // positive roots, rho0 <= rho1
  double neg_root_a = 0, neg_root_b = 0;  // -beta*gamma, -gamma/beta
  bool double_positive_root = false;      // alpha == 1

  double eval(double x) const {
    double acc = coeffs[4];
    for (int k = 3; k >= 0; --k) acc = acc * x + coeffs[k];
    return acc;
  }
  double eval_derivative(double x) const {
    double acc = 4 * coeffs[4];
    for (int k = 3; k >= 1; --k) acc = acc * x + k * coeffs[k];
    return acc;
  }
  // Q(x) = x^2 + (beta + 1/beta) gamma x + gamma^2, the factor positive on x > 0.
  double positive_factor_coeff_b = 0, positive_factor_coeff_c = 0;
  double positive_factor(double x) const {
    return (x + positive_factor_coeff_b) * x + positive_factor_coeff_c;
  }
};

inline QuarticData quartic(const ParamPoint& p) {
  const DerivedConstants d = derive_constants(p);
  const double g = p.gamma();
  QuarticData q;
  // -(x^2 + a1 x + a0)(x^2 + b1 x + b0)
  const double a1 = -2 * d.A / g, a0 = 1 / (g * g);
  const double b1 = 2 * d.B * g, b0 = g * g;
  q.coeffs[4] = -1;
  q.coeffs[3] = -(a1 + b1);
  q.coeffs[2] = -(a0 + b0 + a1 * b1);
  q.coeffs[1] = -(a1 * b0 + a0 * b1);
  q.coeffs[0] = -1;  // a0 * b0 == 1 identically
  const double r_small = 1 / (p.alpha() * g), r_big = p.alpha() / g;
  q.rho0 = std::min(r_small, r_big);
  q.rho1 = std::max(r_small, r_big);
  q.neg_root_a = -p.beta() * g;
  q.neg_root_b = -g / p.beta();
  q.double_positive_root = p.alpha_is_one();
  if (q.double_positive_root) q.rho0 = q.rho1 = 1 / g;
  q.positive_factor_coeff_b = b1;
  q.positive_factor_coeff_c = b0;
  return q;
}

// q(x) = -(x - r3)(x^2 - (1 - AB) x + (A - B)^2 / 4) = -(x - r3) h(x)
struct CubicData {
  std::array<double, 4> coeffs{};  // ascending powers
  double r1 = 0, r2 = 0, r3 = 0;   // r1 <= r2 <= 0 < r3
  bool double_negative_root = false;  // r1 == r2 (alpha == 1 or beta == 1)
  bool zero_root = false;             // r2 == 0, q(0) == 0 (alpha == beta)

  double eval(double x) const {
    return ((coeffs[3] * x + coeffs[2]) * x + coeffs[1]) * x + coeffs[0];
  }
  double h(double x) const { return (x - r1) * (x - r2); }
};

inline CubicData cubic(const ParamPoint& p) {
  const DerivedConstants d = derive_constants(p);
  CubicData c;
  c.r3 = d.C * d.C + 1;
  const double sum = 1 - d.A * d.B;               // r1 + r2
  const double prod = 0.25 * (d.A - d.B) * (d.A - d.B);  // r1 * r2
  c.double_negative_root = p.alpha_is_one() || p.beta_is_one();
  c.zero_root = p.alpha_equals_beta();
  // discriminant (1-AB)^2 - (A-B)^2 = (A^2-1)(B^2-1)
  const double disc = c.double_negative_root
                          ? 0.0
                          : std::sqrt(d.A_minus_one * (d.A + 1) * d.B_minus_one * (d.B + 1));
  c.r1 = 0.5 * (sum - disc);
  if (c.zero_root)
    c.r2 = 0;
  else if (c.double_negative_root)
    c.r2 = c.r1;
  else
    c.r2 = c.r1 != 0 ? prod / c.r1 : 0.0;
  if (c.zero_root) c.r1 = sum;
  // -(x - r3)(x^2 - sum x + prod)
  c.coeffs[3] = -1;
  c.coeffs[2] = sum + c.r3;
  c.coeffs[1] = -(prod + c.r3 * sum);
  c.coeffs[0] = c.r3 * prod;
  if (c.zero_root) c.coeffs[0] = 0;
  return c;
}

struct RegionMembership {
  bool in_O = false;
  bool in_W = false;
  double L_aux = 0;  // C^2 - (A - B)^2 / (4AB)
};

inline RegionMembership region_membership(const ParamPoint& p) {
  const DerivedConstants d = derive_constants(p);
  RegionMembership r;
  r.in_O = p.alpha() >= 1 && p.beta() >= 1 && p.gamma() >= 1;
  const double diff = d.A - d.B;
  r.L_aux = d.C * d.C - diff * diff / (4 * d.A * d.B);
  r.in_W = r.in_O && p.beta() >= p.alpha() && r.L_aux > 0;
  return r;
}

}  // namespace cmcaf
