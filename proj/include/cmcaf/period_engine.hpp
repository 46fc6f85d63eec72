#pragma once
// Period integrals of the construction: the v half-period sigma, the turning
// angle Theta, the period map Per = Theta/pi, the level sets Per = c and the
// half-periods of the separated (s, t) system.
//
// All integrals over [r_a, r_b] with 1/sqrt((x - r_a)(r_b - x)) endpoint
// behaviour are mapped to x = r_a + (r_b - r_a)(1 - cos th)/2, th in [0, pi],
// which absorbs the singular factor exactly and leaves a smooth even
// integrand in th.

#include <cmath>
#include <limits>
#include <numbers>

#include "cmcaf/numerics.hpp"
#include "cmcaf/param_core.hpp"

namespace cmcaf {

struct PeriodData {
  double sigma = 0;  // v half-period
  double theta = 0;  // turning angle over one half-period
  double per = 0;    // theta / pi
};

struct STPeriods {
  double L_half = 0;
  double M_half = std::numeric_limits<double>::infinity();
  bool M_infinite() const { return std::isinf(M_half); }
};

namespace detail {

// Below this distance from alpha = 1 the positive roots are treated as merged.
inline constexpr double kAlphaMergeThreshold = 1e-8;

inline double map_cos(double lo, double hi, double th) {
  return lo + (hi - lo) * 0.5 * (1 - std::cos(th));
}

}  // namespace detail

// Per via quadrature of the regularized integrand, without the closed-form
// shortcut at alpha = 1.
inline double per_quadrature(const ParamPoint& p, const Tolerances& tol = {}) {
  const QuarticData q = quartic(p.canonical());
  auto g = [&](double th) {
    const double x = detail::map_cos(q.rho0, q.rho1, th);
    return (x - 1 / x) / std::sqrt(q.positive_factor(x));
  };
  return numerics::mean_over_half_turn(g, tol.quad).value;
}

inline double sigma_quadrature(const ParamPoint& p, const Tolerances& tol = {}) {
  const QuarticData q = quartic(p.canonical());
  auto g = [&](double th) {
    const double x = detail::map_cos(q.rho0, q.rho1, th);
    return 2 / std::sqrt(q.positive_factor(x));
  };
  return std::numbers::pi * numerics::mean_over_half_turn(g, tol.quad).value;
}

inline double per_closed_form_alpha_one(double beta, double gamma) {
  const double g2 = gamma * gamma;
  return (1 - g2) / std::sqrt(1 + (beta + 1 / beta) * g2 + g2 * g2);
}

inline double sigma_closed_form_alpha_one(double beta, double gamma) {
  const double g2 = gamma * gamma;
  return 2 * std::numbers::pi * gamma / std::sqrt(1 + (beta + 1 / beta) * g2 + g2 * g2);
}

inline double per_map(const ParamPoint& p, const Tolerances& tol = {}) {
  const ParamPoint c = p.canonical();
  if (c.gamma() == 1.0) return 0.0;
  if (c.alpha() - 1 < detail::kAlphaMergeThreshold)
    return per_closed_form_alpha_one(c.beta(), c.gamma());
  return per_quadrature(c, tol);
}

inline double sigma_period(const ParamPoint& p, const Tolerances& tol = {}) {
  const ParamPoint c = p.canonical();
  if (c.alpha() - 1 < detail::kAlphaMergeThreshold)
    return sigma_closed_form_alpha_one(c.beta(), c.gamma());
  return sigma_quadrature(c, tol);
}

inline PeriodData period_data(const ParamPoint& p, const Tolerances& tol = {}) {
  PeriodData d;
  d.sigma = sigma_period(p, tol);
  d.per = per_map(p, tol);
  d.theta = std::numbers::pi * d.per;
  return d;
}

// gamma_c(alpha, beta): the unique gamma >= 1 with Per(alpha, beta, gamma) = c.
inline double gamma_level(double c, double alpha, double beta, const Tolerances& tol = {}) {
  if (!(c > -1 && c <= 0)) throw DomainError("gamma_level: level must lie in (-1, 0]");
  if (!(alpha > 0) || !(beta > 0)) throw DomainError("gamma_level: need alpha, beta > 0");
  if (c == 0) return 1.0;
  auto f = [&](double g) { return per_map(ParamPoint(alpha, beta, g), tol) - c; };
  double lo = 1.0, hi = 2.0;
  int doublings = 0;
  while (f(hi) > 0) {
    lo = hi;
    hi *= 2;
    if (++doublings > 60) throw NumericError("gamma_level: bracket growth failed", hi);
  }
  return numerics::solve_bracketed(f, lo, hi, 0.0, tol.root * 0.1 * hi);
}

inline STPeriods st_half_periods(const ParamPoint& p, const Tolerances& tol = {}) {
  if (!(p.gamma() > 1)) throw DomainError("st_half_periods requires gamma > 1");
  const CubicData q = cubic(p);
  STPeriods out;
  {
    auto g = [&](double th) {
      const double x = detail::map_cos(1.0, q.r3, th);
      return 1 / std::sqrt(x * q.h(x));
    };
    out.L_half = std::numbers::pi * numerics::mean_over_half_turn(g, tol.quad).value;
  }
  const bool degenerate = q.zero_root || q.double_negative_root || q.r2 - q.r1 < 1e-10;
  if (!degenerate) {
    auto g = [&](double th) {
      const double x = detail::map_cos(q.r2, 0.0, th);
      return 1 / std::sqrt((1 - x) * (q.r3 - x) * (x - q.r1));
    };
    out.M_half = std::numbers::pi * numerics::mean_over_half_turn(g, tol.quad).value;
  }
  return out;
}

}  // namespace cmcaf
