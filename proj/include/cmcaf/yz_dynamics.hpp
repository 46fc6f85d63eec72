#pragma once
// The Hamiltonian (y, z) system, its two first integrals, the separated
// (s, t) form used as an independent oracle, and the roots u1 and tau.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "cmcaf/numerics.hpp"
#include "cmcaf/param_core.hpp"
#include "cmcaf/period_engine.hpp"

namespace cmcaf {

struct YZState {
  double u = 0, y = 0, z = 0, y_prime = 0, z_prime = 0;
};

struct FirstIntegrals {
  double h = 0, k = 0;
};

inline FirstIntegrals first_integrals(const YZState& s, double a_hat) {
  const double d = s.y * s.y - s.z * s.z;
  FirstIntegrals f;
  f.h = s.y_prime * s.y_prime - s.z_prime * s.z_prime - (a_hat - 1) * s.y * s.y +
        a_hat * s.z * s.z + d * d;
  const double w = s.z * s.y_prime - s.y * s.z_prime;
  f.k = w * w + s.z_prime * s.z_prime + s.z * s.z * (d - a_hat);
  return f;
}

// State vector (y, y', z, z').
using YZVector = std::array<double, 4>;

struct YZSystem {
  double a_hat;
  void operator()(const YZVector& s, YZVector& ds, double) const {
    const double y = s[0], z = s[2], d = y * y - z * z;
    ds[0] = s[1];
    ds[1] = (a_hat - 1) * y - 2 * y * d;
    ds[2] = s[3];
    ds[3] = a_hat * z - 2 * z * d;
  }
};

inline YZVector yz_initial(const ParamPoint& p) {
  const DerivedConstants d = derive_constants(p);
  return {0.0, 0.5 * (d.A + d.B) * d.C, 0.0, 0.5 * (d.B - d.A) * std::sqrt(d.C * d.C + 1)};
}

// Adaptive Dormand-Prince trajectory over [0, u_max]. Accepted step nodes are
// stored; states between nodes are recovered by re-integrating from the
// preceding node at the trajectory tolerance.
class YZTrajectory {
 public:
  YZTrajectory() = default;
  YZTrajectory(const ParamPoint& p, double u_max, double tol)
      : param_(p), a_hat_(derive_constants(p).a_hat), u_max_(u_max), tol_(tol) {
    YZSystem sys{a_hat_};
    auto stepper = numerics::odeint::make_dense_output(tol, tol,
                                                       numerics::odeint::runge_kutta_dopri5<YZVector>());
    stepper.initialize(yz_initial(p), 0.0, std::min(1e-3, u_max));
    nodes_u_.push_back(0.0);
    nodes_.push_back(yz_initial(p));
    std::size_t guard = 0;
    while (stepper.current_time() < u_max) {
      const auto step = stepper.do_step(sys);
      if (step.second - step.first < 1e-14 * std::max(1.0, step.first) || ++guard > 2000000)
        throw NumericError("integrate_yz: step size underflow", stepper.current_time());
      nodes_u_.push_back(stepper.current_time());
      nodes_.push_back(stepper.current_state());
    }
  }

  const ParamPoint& param() const { return param_; }
  double a_hat() const { return a_hat_; }
  double u_max() const { return u_max_; }
  double tol() const { return tol_; }
  const std::vector<double>& node_u() const { return nodes_u_; }
  const std::vector<YZVector>& node_states() const { return nodes_; }

  YZVector vector_at(double u) const {
    if (u < 0 || u > nodes_u_.back()) throw DomainError("YZTrajectory: query outside integrated range");
    auto it = std::upper_bound(nodes_u_.begin(), nodes_u_.end(), u);
    const std::size_t k = static_cast<std::size_t>(std::distance(nodes_u_.begin(), it)) - 1;
    if (nodes_u_[k] == u) return nodes_[k];
    return numerics::integrate_to(YZSystem{a_hat_}, nodes_[k], nodes_u_[k], u, tol_ * 0.1);
  }

  YZState state_at(double u) const {
    const YZVector v = vector_at(u);
    return {u, v[0], v[2], v[1], v[3]};
  }

  // Largest |h - h0|, |k - k0| over the stored nodes.
  std::pair<double, double> first_integral_drift() const {
    const auto f0 = first_integrals(as_state(0), a_hat_);
    double dh = 0, dk = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto f = first_integrals(as_state(i), a_hat_);
      dh = std::max(dh, std::abs(f.h - f0.h));
      dk = std::max(dk, std::abs(f.k - f0.k));
    }
    return {dh, dk};
  }

  YZState as_state(std::size_t i) const {
    return {nodes_u_[i], nodes_[i][0], nodes_[i][2], nodes_[i][1], nodes_[i][3]};
  }

  std::optional<double> u1;
  std::optional<double> tau;

 private:
  ParamPoint param_{1, 1, 1};
  double a_hat_ = 0;
  double u_max_ = 0;
  double tol_ = 0;
  std::vector<double> nodes_u_;
  std::vector<YZVector> nodes_;
};

// ---------------------------------------------------------------------------
// Separated (s, t) system in angular form: s = 1 + (r3 - 1) sin^2(th),
// t = r2 sin^2(chi). Turning points of s and t become regular points of th, chi.

struct STState {
  double lambda = 0, s = 1, t = 0, u_of_lambda = 0;
  double theta = 0, chi = 0;
};

struct STSample {
  STState st;
  double y = 0, z = 0;  // mapped back through y^2 = (s-1)(1-t), z^2 = -s t
};

struct STSystem {
  CubicData q;
  void operator()(const std::array<double, 3>& x, std::array<double, 3>& dx, double) const {
    const double sth = std::sin(x[0]), sch = std::sin(x[1]);
    const double s = 1 + (q.r3 - 1) * sth * sth;
    const double t = q.r2 * sch * sch;
    dx[0] = 0.5 * std::sqrt(std::max(0.0, s * q.h(s)));
    dx[1] = 0.5 * std::sqrt(std::max(0.0, (1 - t) * (q.r3 - t) * (t - q.r1)));
    dx[2] = 0.5 * (s - t);
  }
};

inline std::vector<STSample> st_oracle(const ParamPoint& p, std::span<const double> lambdas,
                                       const Tolerances& tol = {}) {
  if (!(p.gamma() > 1)) throw DomainError("st_oracle requires gamma > 1");
  const CubicData q = cubic(p);
  const DerivedConstants d = derive_constants(p);
  const double zsign = d.B > d.A ? 1.0 : (d.B < d.A ? -1.0 : 0.0);
  std::vector<STSample> out;
  out.reserve(lambdas.size());
  numerics::integrate_at(STSystem{q}, std::array<double, 3>{0, 0, 0}, 0.0, lambdas, tol.ode,
                         [&](std::size_t i, const std::array<double, 3>& x) {
                           STSample smp;
                           smp.st.lambda = lambdas[i];
                           smp.st.theta = x[0];
                           smp.st.chi = x[1];
                           const double sth = std::sin(x[0]), sch = std::sin(x[1]);
                           smp.st.s = 1 + (q.r3 - 1) * sth * sth;
                           smp.st.t = q.r2 * sch * sch;
                           smp.st.u_of_lambda = x[2];
                           smp.y = std::sqrt(q.r3 - 1) * sth * std::sqrt(1 - smp.st.t);
                           smp.z = q.zero_root ? 0.0 : zsign * std::sqrt(smp.st.s) * std::sqrt(-q.r2) * sch;
                           out.push_back(smp);
                         });
  return out;
}

// Uniform samples lambda_k = k * lambda_max / samples, k = 0..samples.
inline std::vector<STSample> st_oracle(const ParamPoint& p, double lambda_max, std::size_t samples = 256,
                                       const Tolerances& tol = {}) {
  if (!(lambda_max > 0) || samples == 0) throw DomainError("st_oracle: need lambda_max > 0");
  std::vector<double> lam(samples + 1);
  for (std::size_t k = 0; k <= samples; ++k) lam[k] = lambda_max * double(k) / double(samples);
  return st_oracle(p, std::span<const double>(lam), tol);
}

// u(2L): the first positive zero of y predicted by the separated system.
inline double u1_from_st(const ParamPoint& p, const Tolerances& tol = {}) {
  const double two_L = 2 * st_half_periods(p, tol).L_half;
  const double lam[1] = {two_L};
  return st_oracle(p, std::span<const double>(lam, 1), tol).front().st.u_of_lambda;
}

// Sign change of f on the trajectory nodes in (u_lo, u_hi], polished by toms748.
// f(u) > 0 just after u_lo is required; the crossing is to f <= 0.
template <class F>
std::optional<double> first_downcrossing(const YZTrajectory& traj, F&& f, double u_hi, double root_tol) {
  const auto& us = traj.node_u();
  double prev_u = 0;
  for (std::size_t i = 1; i < us.size() && us[i - 1] < u_hi; ++i) {
    const double u = std::min(us[i], u_hi);
    if (f(u) <= 0) {
      double lo = prev_u;
      if (lo == 0) {
        // f(0) = 0: walk towards 0 until f is positive.
        lo = u;
        int halvings = 0;
        do {
          lo *= 0.5;
          if (++halvings > 200) return std::nullopt;
        } while (f(lo) <= 0);
      }
      return numerics::solve_bracketed(f, lo, u, root_tol, 1e-15);
    }
    prev_u = u;
  }
  return std::nullopt;
}

inline double find_u1(const YZTrajectory& traj, const Tolerances& tol = {}) {
  if (!(traj.param().gamma() > 1)) throw DomainError("find_u1 requires gamma > 1");
  auto y = [&](double u) { return traj.vector_at(u)[0]; };
  auto r = first_downcrossing(traj, y, traj.node_u().back(), tol.root);
  if (!r) throw NumericError("find_u1: no zero of y inside the integration window", traj.u_max());
  return *r;
}

inline double find_tau(const YZTrajectory& traj, const ParamPoint& p, const Tolerances& tol = {}) {
  if (!region_membership(p).in_W) throw DomainError("find_tau requires a point of W");
  const double u1 = traj.u1 ? *traj.u1 : find_u1(traj, tol);
  if (p.alpha_equals_beta()) return u1;
  auto f = [&](double u) {
    const auto v = traj.vector_at(u);
    return v[0] - v[2];
  };
  auto r = first_downcrossing(traj, f, u1, tol.root);
  if (!r) throw NumericError("find_tau: y - z has no sign change on (0, u1]", u1);
  return *r;
}

inline double default_u_max(const ParamPoint& p, const Tolerances& tol = {}) {
  return 1.2 * u1_from_st(p, tol);
}

// Full trajectory with u1 (and tau on W) located.
inline YZTrajectory integrate_yz(const ParamPoint& p, double u_max, double ode_tol,
                                 const Tolerances& tol = {}) {
  if (!(u_max > 0) || !(ode_tol > 0)) throw DomainError("integrate_yz: need u_max > 0, tol > 0");
  YZTrajectory traj(p, u_max, ode_tol);
  if (p.gamma() > 1) {
    try {
      traj.u1 = find_u1(traj, tol);
    } catch (const NumericError&) {
    }
    if (traj.u1 && region_membership(p).in_W) traj.tau = find_tau(traj, p, tol);
  }
  return traj;
}

inline YZTrajectory integrate_yz(const ParamPoint& p, const Tolerances& tol = {}) {
  return integrate_yz(p, default_u_max(p, tol), tol.ode, tol);
}

}  // namespace cmcaf
