#pragma once
// Numerical plumbing shared by the construction: bracketed root polishing,
// endpoint-regularized quadrature and ODE integration to prescribed times.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "cmcaf/core.hpp"

namespace cmcaf::numerics {

namespace odeint = boost::numeric::odeint;

// Root of f in [lo, hi]; f(lo) and f(hi) must have opposite signs (or vanish).
// The bracket is shrunk until its width is below rel_tol * |x| + abs_tol.
template <class F>
double solve_bracketed(F&& f, double lo, double hi, double rel_tol, double abs_tol = 0.0,
                       std::uintmax_t max_iter = 200) {
  double flo = f(lo);
  if (flo == 0) return lo;
  double fhi = f(hi);
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0)) {
    std::ostringstream os;
    os << "root not bracketed on [" << lo << ", " << hi << "]: f = " << flo << ", " << fhi;
    throw NumericError(os.str());
  }
  auto stop = [rel_tol, abs_tol](double a, double b) {
    return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b)) + abs_tol;
  };
  std::uintmax_t iters = max_iter;
  auto r = boost::math::tools::toms748_solve(
      [&](double x) { return f(x); }, lo, hi, flo, fhi, stop, iters);
  if (iters >= max_iter) throw NumericError("bracketed root did not converge", 0.5 * (r.first + r.second));
  return 0.5 * (r.first + r.second);
}

struct QuadratureResult {
  double value = 0;
  double error = 0;
  std::size_t nodes = 0;
};

// (1/pi) * integral over [0, pi] of g(theta) for g smooth in cos(theta).
// Midpoint rule on theta (Gauss-Chebyshev in cos(theta)); node counts triple
// so that every refinement reuses the previous nodes. Convergence is spectral
// once the integrand is free of endpoint singularities.
template <class G>
QuadratureResult mean_over_half_turn(G&& g, double tol, std::size_t n0 = 9,
                                     std::size_t n_max = 177147) {
  std::size_t n = n0;
  double sum = 0;
  for (std::size_t k = 0; k < n; ++k) sum += g((k + 0.5) * std::numbers::pi / double(n));
  double prev = sum / double(n);
  while (3 * n <= n_max) {
    const std::size_t m = 3 * n;
    for (std::size_t k = 0; k < m; ++k) {
      if (k % 3 == 1) continue;
      sum += g((k + 0.5) * std::numbers::pi / double(m));
    }
    n = m;
    const double cur = sum / double(n);
    const double err = std::abs(cur - prev);
    if (err <= tol * std::max(1.0, std::abs(cur))) return {cur, err, n};
    prev = cur;
  }
  throw NumericError("quadrature did not reach tolerance", prev);
}

// Controlled Runge-Kutta-Fehlberg 7(8) stepping that lands exactly on each
// requested time (monotone in either direction). `obs(index, state)` is called
// at every requested time and may modify the state (e.g. re-orthonormalize).
template <class State, class System, class Observer>
void integrate_at(System sys, State x, double t0, std::span<const double> times, double tol,
                  Observer obs) {
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
  double t = t0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double target = times[i];
    if (target != t) {
      const double dir = target > t ? 1.0 : -1.0;
      double dt = dir * std::min(0.05, std::abs(target - t));
      try {
        odeint::integrate_adaptive(stepper, sys, x, t, target, dt);
      } catch (const std::exception& e) {
        throw NumericError(std::string("ODE integration failed: ") + e.what(), t);
      }
      t = target;
    }
    obs(i, x);
  }
}

template <class State, class System>
State integrate_to(System sys, State x, double t0, double t1, double tol) {
  const double ts[1] = {t1};
  State out{};
  integrate_at(sys, x, t0, std::span<const double>(ts, 1), tol,
               [&](std::size_t, const State& s) { out = s; });
  return out;
}

// Fourth-order accurate point derivative on a uniform grid; one-sided stencils
// near the ends.
inline double fd_first(std::span<const double> f, std::size_t i, double h) {
  const std::size_t n = f.size();
  if (i >= 2 && i + 2 < n) return (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
  if (i < 2)
    return (-25 * f[i] + 48 * f[i + 1] - 36 * f[i + 2] + 16 * f[i + 3] - 3 * f[i + 4]) / (12 * h);
  return (25 * f[i] - 48 * f[i - 1] + 36 * f[i - 2] - 16 * f[i - 3] + 3 * f[i - 4]) / (12 * h);
}

inline double fd_second(std::span<const double> f, std::size_t i, double h) {
  const std::size_t n = f.size();
  if (i >= 2 && i + 2 < n)
    return (-f[i - 2] + 16 * f[i - 1] - 30 * f[i] + 16 * f[i + 1] - f[i + 2]) / (12 * h * h);
  const int s = i < 2 ? 1 : -1;
  auto at = [&](int k) { return f[static_cast<std::size_t>(static_cast<long>(i) + s * k)]; };
  return (45 * at(0) - 154 * at(1) + 214 * at(2) - 156 * at(3) + 61 * at(4) - 10 * at(5)) / (12 * h * h);
}

// Eighth-order central first derivative of a periodic sequence.
inline double fd_first_periodic(std::span<const double> f, std::size_t i, double h) {
  static constexpr double c[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  const std::size_t n = f.size();
  double acc = 0;
  for (std::size_t k = 1; k <= 4; ++k) acc += c[k - 1] * (f[(i + k) % n] - f[(i + n - k) % n]);
  return acc / h;
}

inline double fd_second_periodic(std::span<const double> f, std::size_t i, double h) {
  static constexpr double c[4] = {8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
  const std::size_t n = f.size();
  double acc = -205.0 / 72 * f[i];
  for (std::size_t k = 1; k <= 4; ++k) acc += c[k - 1] * (f[(i + k) % n] + f[(i + n - k) % n]);
  return acc / (h * h);
}

}  // namespace cmcaf::numerics
