#pragma once

// Continuum limit of the chain: method-of-lines field equations on a uniform
// grid, energy functional and topological charge.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "chain.hpp"
#include "errors.hpp"
#include "stencil.hpp"

namespace pendulon {

struct FieldGrid {
  std::vector<double> x, Theta, Phi, Theta_t, Phi_t;
  double t = 0.0;

  FieldGrid() = default;
  /// n points uniformly on [x_min, x_max], all fields zero.
  FieldGrid(std::size_t n, double x_min, double x_max)
      : x(n), Theta(n, 0.0), Phi(n, 0.0), Theta_t(n, 0.0), Phi_t(n, 0.0) {
    if (n < 6) throw DomainError("field grid: need at least 6 points");
    if (!(x_max > x_min)) throw DomainError("field grid: x_max must exceed x_min");
    const double dx = (x_max - x_min) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j < n; ++j) x[j] = x_min + dx * static_cast<double>(j);
  }

  std::size_t size() const { return x.size(); }
  double dx() const { return (x.back() - x.front()) / static_cast<double>(x.size() - 1); }

  void validate() const {
    const std::size_t n = x.size();
    if (n < 6) throw DomainError("field grid: need at least 6 points");
    if (Theta.size() != n || Phi.size() != n || Theta_t.size() != n || Phi_t.size() != n)
      throw DomainError("field grid: mismatched array lengths");
    const double h = dx();
    for (std::size_t j = 0; j + 1 < n; ++j)
      if (std::abs(x[j + 1] - x[j] - h) >= 1e-12 * h)
        throw DomainError("field grid: spacing is not uniform");
  }
};

/// Gradient-energy matrix: the continuum stacking and torsion terms are
/// (1/2) q_x^T G(Phi) q_x with q = (Theta, Phi).
inline MassMatrix gradient_matrix(double phi, const ChainParams& p) {
  const double c = std::cos(phi);
  const double ks = p.Ks();
  return {p.Kt() + ks * r2beta(p.r, p.R, c), ks * r2alpha(p.r, p.R, c), ks * p.r * p.r};
}

/// Generalized forces f with M(Phi) q_tt = f, one pair per grid point.
struct PdeForces {
  std::vector<double> theta, phi;
};

/// Right-hand side of the field equations before inverting the mass matrix.
/// End points are Dirichlet: their forces are reported as zero.
inline PdeForces pde_forces(const FieldGrid& g, const ChainParams& p) {
  g.validate();
  const std::size_t n = g.size();
  const Stencil st(n, g.dx());
  const auto Tx = st.first(g.Theta), Txx = st.second(g.Theta);
  const auto Px = st.first(g.Phi), Pxx = st.second(g.Phi);
  PdeForces f{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const double ks = p.Ks();
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const double th = g.Theta[j], ph = g.Phi[j];
    const double tt = g.Theta_t[j], pt = g.Phi_t[j];
    const double tx = Tx[j], px = Px[j];
    const MassMatrix G = gradient_matrix(ph, p);
    const double w = p.r * p.R * std::sin(ph);
    const double sp = std::sin(th + ph);

    double ft = G.tt * Txx[j] + G.tp * Pxx[j];
    double fp = G.tp * Txx[j] + G.pp * Pxx[j];
    // dG/dPhi and dM/dPhi terms
    ft += -ks * w * px * (2.0 * tx + px) + p.m * w * pt * (2.0 * tt + pt);
    fp += ks * w * tx * tx - p.m * w * tt * tt;
    ft -= p.g * ((p.M + p.m) * p.R * std::sin(th) + p.m * p.r * sp);
    fp -= p.g * p.m * p.r * sp + p.h.dh(ph);
    f.theta[j] = ft;
    f.phi[j] = fp;
  }
  return f;
}

struct PdeAccel {
  std::vector<double> Theta_tt, Phi_tt;
};

/// Field accelerations; with r = 0 the Phi field has no inertia and is frozen.
inline PdeAccel pde_rhs(const FieldGrid& g, const ChainParams& p) {
  const PdeForces f = pde_forces(g, p);
  const std::size_t n = g.size();
  PdeAccel a{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const bool frozen = !(p.r > 0.0);
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const MassMatrix mm = mass_matrix(g.Phi[j], p);
    if (frozen) {
      a.Theta_tt[j] = f.theta[j] / mm.tt;
    } else {
      const auto q = mm.solve(f.theta[j], f.phi[j]);
      a.Theta_tt[j] = q[0];
      a.Phi_tt[j] = q[1];
    }
  }
  return a;
}

/// Largest characteristic speed, maximised over Phi in [-pi, pi].
inline double max_wave_speed(const ChainParams& p) {
  double cmax = 0.0;
  for (int i = 0; i <= 256; ++i) {
    const double ph = -std::numbers::pi + 2.0 * std::numbers::pi * i / 256.0;
    const MassMatrix G = gradient_matrix(ph, p);
    const MassMatrix M = mass_matrix(ph, p);
    double lam;
    if (!(p.r > 0.0)) {
      lam = G.tt / M.tt;
    } else {
      // largest root of det(G - lam M) = 0
      const double a = M.det();
      const double b = -(G.tt * M.pp + G.pp * M.tt - 2.0 * G.tp * M.tp);
      const double c = G.det();
      const double disc = std::max(b * b - 4.0 * a * c, 0.0);
      lam = (-b + std::sqrt(disc)) / (2.0 * a);
    }
    cmax = std::max(cmax, std::sqrt(std::max(lam, 0.0)));
  }
  return cmax;
}

namespace detail {

inline void axpy_fields(FieldGrid& out, const FieldGrid& s, const PdeAccel& a, double h) {
  const std::size_t n = s.size();
  for (std::size_t j = 1; j + 1 < n; ++j) {
    out.Theta[j] = s.Theta[j] + h * s.Theta_t[j];
    out.Phi[j] = s.Phi[j] + h * s.Phi_t[j];
    out.Theta_t[j] = s.Theta_t[j] + h * a.Theta_tt[j];
    out.Phi_t[j] = s.Phi_t[j] + h * a.Phi_tt[j];
  }
}

}  // namespace detail

/// One RK4 step of the method-of-lines system; end points stay fixed.
inline FieldGrid pde_step(const FieldGrid& s, double dt, const ChainParams& p) {
  const std::size_t n = s.size();
  FieldGrid y = s;
  const PdeAccel a1 = pde_rhs(s, p);
  detail::axpy_fields(y, s, a1, 0.5 * dt);
  FieldGrid s2 = y;
  const PdeAccel a2 = pde_rhs(s2, p);
  detail::axpy_fields(y, s, a2, 0.5 * dt);
  FieldGrid s3 = y;
  const PdeAccel a3 = pde_rhs(s3, p);
  detail::axpy_fields(y, s, a3, dt);
  FieldGrid s4 = y;
  const PdeAccel a4 = pde_rhs(s4, p);

  FieldGrid out = s;
  const double w = dt / 6.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    out.Theta[j] += w * (s.Theta_t[j] + 2.0 * s2.Theta_t[j] + 2.0 * s3.Theta_t[j] + s4.Theta_t[j]);
    out.Phi[j] += w * (s.Phi_t[j] + 2.0 * s2.Phi_t[j] + 2.0 * s3.Phi_t[j] + s4.Phi_t[j]);
    out.Theta_t[j] +=
        w * (a1.Theta_tt[j] + 2.0 * a2.Theta_tt[j] + 2.0 * a3.Theta_tt[j] + a4.Theta_tt[j]);
    out.Phi_t[j] += w * (a1.Phi_tt[j] + 2.0 * a2.Phi_tt[j] + 2.0 * a3.Phi_tt[j] + a4.Phi_tt[j]);
  }
  out.t = s.t + dt;
  for (std::size_t j = 0; j < n; ++j) {
    const double big = std::max({std::abs(out.Theta[j]), std::abs(out.Phi[j]),
                                 std::abs(out.Theta_t[j]), std::abs(out.Phi_t[j])});
    if (!(big <= 1e6))
      throw NumericalError("field evolution unstable at t = " + std::to_string(out.t) +
                               ", x = " + std::to_string(out.x[j]),
                           out.t, big);
  }
  return out;
}

/// Evolve to t_end (step count ceil(t_end/dt), equal steps). Returns the
/// initial grid, every snapshot_every-th state and the final state.
inline std::vector<FieldGrid> evolve(const FieldGrid& g, double t_end, double dt,
                                     const ChainParams& p, std::size_t snapshot_every = 1) {
  if (!(t_end > 0.0) || !(dt > 0.0)) throw DomainError("evolve: t_end and dt must be > 0");
  if (snapshot_every == 0) throw DomainError("evolve: snapshot_every must be >= 1");
  p.validate();
  g.validate();
  const double limit = 0.5 * g.dx() / max_wave_speed(p);
  if (dt > limit)
    throw DomainError("evolve: dt = " + std::to_string(dt) + " exceeds the stability limit " +
                      std::to_string(limit));
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = t_end / static_cast<double>(steps);
  std::vector<FieldGrid> out{g};
  FieldGrid s = g;
  for (std::size_t k = 1; k <= steps; ++k) {
    s = pde_step(s, h, p);
    s.t = g.t + static_cast<double>(k) * h;
    if (k % snapshot_every == 0 || k == steps) out.push_back(s);
  }
  return out;
}

/// Energy density H = T + gradient + gravity (zero at rest) + h, per site.
/// The continuum total divides by delta so it matches the lattice sum.
inline std::vector<double> energy_density(const FieldGrid& g, const ChainParams& p) {
  g.validate();
  const std::size_t n = g.size();
  const Stencil st(n, g.dx());
  const auto Tx = st.first(g.Theta), Px = st.first(g.Phi);
  std::vector<double> H(n);
  for (std::size_t j = 0; j < n; ++j) {
    const MassMatrix M = mass_matrix(g.Phi[j], p);
    const MassMatrix G = gradient_matrix(g.Phi[j], p);
    const double tt = g.Theta_t[j], pt = g.Phi_t[j];
    const double kin = 0.5 * (M.tt * tt * tt + 2.0 * M.tp * tt * pt + M.pp * pt * pt);
    const double grad = 0.5 * (G.tt * Tx[j] * Tx[j] + 2.0 * G.tp * Tx[j] * Px[j] + G.pp * Px[j] * Px[j]);
    H[j] = kin + grad + external_potential(g.Theta[j], g.Phi[j], p) + p.h.h(g.Phi[j]);
  }
  return H;
}

/// (1/delta) * trapezoid integral of H.
inline double energy_total(const FieldGrid& g, const ChainParams& p) {
  const auto H = energy_density(g, p);
  const double dx = g.dx();
  double s = 0.5 * (H.front() + H.back());
  for (std::size_t j = 1; j + 1 < H.size(); ++j) s += H[j];
  return s * dx / p.delta;
}

/// Winding number round((last - first) / 2 pi); throws if not near an integer.
inline int winding_number(double first, double last) {
  const double w = (last - first) / (2.0 * std::numbers::pi);
  const double n = std::round(w);
  if (std::abs(w - n) >= 0.25) throw DomainError("non-topological boundary data");
  return static_cast<int>(n);
}

inline int topological_charge(const FieldGrid& g) {
  if (g.Theta.empty()) throw DomainError("topological charge of an empty grid");
  return winding_number(g.Theta.front(), g.Theta.back());
}

}  // namespace pendulon
