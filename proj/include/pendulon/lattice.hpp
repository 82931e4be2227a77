#pragma once

// Time evolution of the discrete chain with classical RK4 on (q, qdot).

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "chain.hpp"
#include "errors.hpp"

namespace pendulon {

/// Total energy T + U; every potential term vanishes at rest.
inline double total_energy(const LatticeState& s, const ChainParams& p) {
  const EnergyParts e = energy_parts(s, p);
  return e.kinetic + e.potential();
}

namespace detail {

struct Rate {
  std::vector<double> dq_t, dq_p, dv_t, dv_p;
};

inline Rate rate(const LatticeState& s, const ChainParams& p) {
  SiteAccel a = discrete_forces(s, p);
  return {s.theta_dot, s.phi_dot, std::move(a.theta_dd), std::move(a.phi_dd)};
}

inline LatticeState advance(const LatticeState& s, const Rate& k, double h) {
  LatticeState out = s;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.theta[i] += h * k.dq_t[i];
    out.phi[i] += h * k.dq_p[i];
    out.theta_dot[i] += h * k.dv_t[i];
    out.phi_dot[i] += h * k.dv_p[i];
  }
  return out;
}

}  // namespace detail

/// One RK4 step of length dt. Throws NumericalError if the new state is not finite.
inline LatticeState step(const LatticeState& s, double dt, const ChainParams& p) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be > 0");
  const detail::Rate k1 = detail::rate(s, p);
  const detail::Rate k2 = detail::rate(detail::advance(s, k1, 0.5 * dt), p);
  const detail::Rate k3 = detail::rate(detail::advance(s, k2, 0.5 * dt), p);
  const detail::Rate k4 = detail::rate(detail::advance(s, k3, dt), p);

  LatticeState out = s;
  const double w = dt / 6.0;
  bool finite = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.theta[i] += w * (k1.dq_t[i] + 2.0 * k2.dq_t[i] + 2.0 * k3.dq_t[i] + k4.dq_t[i]);
    out.phi[i] += w * (k1.dq_p[i] + 2.0 * k2.dq_p[i] + 2.0 * k3.dq_p[i] + k4.dq_p[i]);
    out.theta_dot[i] += w * (k1.dv_t[i] + 2.0 * k2.dv_t[i] + 2.0 * k3.dv_t[i] + k4.dv_t[i]);
    out.phi_dot[i] += w * (k1.dv_p[i] + 2.0 * k2.dv_p[i] + 2.0 * k3.dv_p[i] + k4.dv_p[i]);
    finite = finite && std::isfinite(out.theta[i]) && std::isfinite(out.phi[i]) &&
             std::isfinite(out.theta_dot[i]) && std::isfinite(out.phi_dot[i]);
  }
  out.t = s.t + dt;
  if (!finite)
    throw NumericalError("lattice step produced a non-finite state at t = " + std::to_string(out.t),
                         out.t);
  return out;
}

struct SimulationReport {
  std::vector<LatticeState> trajectory;
  std::vector<std::pair<double, double>> energy_series;
  double max_energy_drift = 0.0;
  std::size_t steps = 0;
  double dt = 0.0;  ///< step actually used (t_end divided into equal steps)
};

/// Integrate to t_end. The step count is ceil(t_end/dt) with the step shrunk to
/// land exactly on t_end. Energy is checked every step; snapshots and energy
/// samples are stored every snapshot_every steps and at the end.
inline SimulationReport simulate(const LatticeState& initial, double t_end, double dt,
                                 const ChainParams& p, std::size_t snapshot_every = 1) {
  if (!(t_end > 0.0)) throw DomainError("simulate: t_end must be > 0");
  if (!(dt > 0.0)) throw DomainError("simulate: dt must be > 0");
  if (snapshot_every == 0) throw DomainError("simulate: snapshot_every must be >= 1");
  p.validate();
  initial.validate();

  SimulationReport rep;
  rep.steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  rep.dt = t_end / static_cast<double>(rep.steps);

  const double e0 = total_energy(initial, p);
  LatticeState s = initial;
  rep.trajectory.push_back(s);
  rep.energy_series.emplace_back(s.t, e0);
  const double t0 = initial.t;
  for (std::size_t n = 1; n <= rep.steps; ++n) {
    s = step(s, rep.dt, p);
    s.t = t0 + static_cast<double>(n) * rep.dt;
    const double e = total_energy(s, p);
    rep.max_energy_drift = std::max(rep.max_energy_drift, std::abs(e - e0) / (std::abs(e0) + 1.0));
    if (n % snapshot_every == 0 || n == rep.steps) {
      rep.trajectory.push_back(s);
      rep.energy_series.emplace_back(s.t, e);
    }
  }
  return rep;
}

/// Site coordinate x_i = (i - (n-1)/2) delta, centred on the chain.
inline double site_position(std::size_t i, std::size_t n, double delta) {
  return (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) * delta;
}

/// Travelling-wave profile sample: angles and their z-derivatives.
struct ProfileSample {
  double theta = 0.0, phi = 0.0, theta_z = 0.0, phi_z = 0.0;
};

/// Lattice state sampling a wave q(x - v t - x0) at t = 0:
/// q_i = q(x_i - x0), qdot_i = -v q_z(x_i - x0).
inline LatticeState travelling_initial_state(std::size_t n, double delta, double x0, double v,
                                             const std::function<ProfileSample(double)>& profile) {
  LatticeState s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const ProfileSample q = profile(site_position(i, n, delta) - x0);
    s.theta[i] = q.theta;
    s.phi[i] = q.phi;
    s.theta_dot[i] = -v * q.theta_z;
    s.phi_dot[i] = -v * q.phi_z;
  }
  return s;
}

/// Sine-Gordon kink 4 arctan(exp(k z)) with phi = 0, moving at speed v.
inline LatticeState kink_initial_state(std::size_t n, double delta, double k, double v,
                                       double x0 = 0.0) {
  return travelling_initial_state(n, delta, x0, v, [k](double z) {
    ProfileSample q;
    q.theta = 4.0 * std::atan(std::exp(k * z));
    q.theta_z = 2.0 * k / std::cosh(k * z);
    return q;
  });
}

/// Position where theta first crosses pi (linear interpolation between sites).
inline double kink_center(const LatticeState& s, double delta) {
  const std::size_t n = s.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = s.theta[i] - std::numbers::pi, b = s.theta[i + 1] - std::numbers::pi;
    if (a <= 0.0 && b > 0.0) {
      const double f = a / (a - b);
      return site_position(i, n, delta) + f * delta;
    }
  }
  throw DomainError("kink_center: theta does not cross pi");
}

}  // namespace pendulon
