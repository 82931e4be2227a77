#pragma once

// Discrete double-pendulum chain: parameters, per-bond energies, Lagrangian
// and the generalized accelerations it implies.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "confining.hpp"
#include "errors.hpp"

namespace pendulon {

enum class Topology { open, periodic };

/// Physical constants of the chain. SI units throughout.
struct ChainParams {
  double M = 1.0;        ///< first bob mass [kg]
  double m = 1.0;        ///< second bob mass [kg]
  double R = 1.0;        ///< first beam length [m]
  double r = 1.0;        ///< second beam length [m]
  double kappa_t = 0.0;  ///< torsional spring constant [J]
  double kappa_s = 0.0;  ///< stacking spring constant [J/m^2]
  double g = 9.81;       ///< gravity [m/s^2]
  double delta = 1.0;    ///< lattice spacing [m]
  ConfiningPotential h{};
  Topology topology = Topology::open;

  double lambda() const {
    if (!(R > 0.0)) throw DomainError("lambda = r/R needs R > 0");
    return r / R;
  }
  double rho() const {
    if (!(m > 0.0)) throw DomainError("rho = M/m needs m > 0");
    return M / m;
  }
  /// Continuum couplings K_s = kappa_s delta^2, K_t = kappa_t delta^2.
  double Ks() const { return kappa_s * delta * delta; }
  double Kt() const { return kappa_t * delta * delta; }

  /// Chain with the given continuum couplings at spacing delta.
  static ChainParams from_continuum(double M, double m, double R, double r, double Kt,
                                    double Ks, double g, double delta,
                                    ConfiningPotential h) {
    ChainParams p;
    p.M = M;
    p.m = m;
    p.R = R;
    p.r = r;
    p.kappa_t = Kt / (delta * delta);
    p.kappa_s = Ks / (delta * delta);
    p.g = g;
    p.delta = delta;
    p.h = h;
    return p;
  }

  /// m = 0 is accepted only together with r = 0 (simple pendulum).
  void validate() const {
    auto need = [](bool ok, const char* what) {
      if (!ok) throw DomainError(std::string("chain parameters: ") + what);
    };
    need(M > 0.0, "M must be > 0");
    need(m >= 0.0, "m must be >= 0");
    need(!(m == 0.0 && r > 0.0), "m must be > 0 when r > 0");
    need(R > 0.0, "R must be > 0");
    need(r >= 0.0, "r must be >= 0");
    need(kappa_t >= 0.0, "kappa_t must be >= 0");
    need(kappa_s >= 0.0, "kappa_s must be >= 0");
    need(g >= 0.0, "g must be >= 0");
    need(delta > 0.0, "delta must be > 0");
    h.validate();
  }
};

struct AlphaBeta {
  double alpha;
  double beta;
};

/// alpha = 1 + (R/r) cos phi,  beta = 1 + (R/r)^2 + 2 (R/r) cos phi.
inline AlphaBeta alpha_beta(double phi, const ChainParams& p) {
  if (!(p.r > 0.0)) throw DomainError("alpha_beta: R/r undefined for r = 0");
  const double q = p.R / p.r;
  const double c = std::cos(phi);
  return {1.0 + q * c, 1.0 + q * q + 2.0 * q * c};
}

// r^2 alpha and r^2 beta stay finite at r = 0; all kernels use these.
template <class T>
T r2alpha(const T& r, const T& R, const T& cos_phi) {
  return r * r + r * R * cos_phi;
}
template <class T>
T r2beta(const T& r, const T& R, const T& cos_phi) {
  return r * r + R * R + T(2.0) * r * R * cos_phi;
}

/// Symmetric 2x2 mass matrix of one site in (theta, phi).
struct MassMatrix {
  double tt, tp, pp;

  double det() const { return tt * pp - tp * tp; }
  std::array<double, 2> solve(double ft, double fp) const {
    const double d = det();
    return {(pp * ft - tp * fp) / d, (tt * fp - tp * ft) / d};
  }
};

inline MassMatrix mass_matrix(double phi, const ChainParams& p) {
  const double c = std::cos(phi);
  return {p.M * p.R * p.R + p.m * r2beta(p.r, p.R, c), p.m * r2alpha(p.r, p.R, c),
          p.m * p.r * p.r};
}

/// Closed form of det(mass_matrix) = m r^2 R^2 (M + m sin^2 phi).
inline double mass_matrix_det(double phi, const ChainParams& p) {
  const double s = std::sin(phi);
  return p.m * p.r * p.r * p.R * p.R * (p.M + p.m * s * s);
}

inline double kinetic_energy_site(double theta_dot, double phi, double phi_dot,
                                  const ChainParams& p) {
  const double td = theta_dot, pd = phi_dot;
  return 0.5 * p.M * p.R * p.R * td * td +
         0.5 * p.m *
             (p.R * p.R * td * td + 2.0 * p.R * p.r * std::cos(phi) * (td * td + td * pd) +
              p.r * p.r * (td + pd) * (td + pd));
}

inline double torsional_potential(double theta_i, double theta_ip1, const ChainParams& p) {
  return p.kappa_t * (1.0 - std::cos(theta_ip1 - theta_i));
}

/// Stacking bond energy written in the angles; equals kappa_s/2 |p_{i+1} - p_i|^2
/// for the second-bob positions.
inline double stacking_potential(double theta_i, double phi_i, double theta_ip1,
                                 double phi_ip1, const ChainParams& p) {
  const double dx = p.R * (std::cos(theta_i) - std::cos(theta_ip1)) +
                    p.r * (std::cos(phi_i + theta_i) - std::cos(phi_ip1 + theta_ip1));
  const double dy = p.R * (std::sin(theta_i) - std::sin(theta_ip1)) +
                    p.r * (std::sin(phi_i + theta_i) - std::sin(phi_ip1 + theta_ip1));
  return 0.5 * p.kappa_s * (dx * dx + dy * dy);
}

/// Gravitational energy of one site, zero at rest.
inline double external_potential(double theta, double phi, const ChainParams& p) {
  return p.g * (p.M * p.R * (1.0 - std::cos(theta)) +
                p.m * (p.R + p.r - (p.R * std::cos(theta) + p.r * std::cos(phi + theta))));
}

/// Angles and angular velocities of all sites at one instant.
struct LatticeState {
  std::vector<double> theta, phi, theta_dot, phi_dot;
  double t = 0.0;

  LatticeState() = default;
  explicit LatticeState(std::size_t n, double t0 = 0.0)
      : theta(n, 0.0), phi(n, 0.0), theta_dot(n, 0.0), phi_dot(n, 0.0), t(t0) {}

  std::size_t size() const { return theta.size(); }

  void validate() const {
    const std::size_t n = theta.size();
    if (phi.size() != n || theta_dot.size() != n || phi_dot.size() != n)
      throw DomainError("lattice state: mismatched array lengths");
    if (n < 2) throw DomainError("lattice state: need at least 2 sites");
  }
};

/// Number of nearest-neighbour bonds for the chosen topology.
inline std::size_t bond_count(std::size_t n, Topology topo) {
  return topo == Topology::periodic ? n : n - 1;
}

struct EnergyParts {
  double kinetic = 0.0;
  double torsional = 0.0;
  double stacking = 0.0;
  double external = 0.0;
  double confining = 0.0;

  double potential() const { return torsional + stacking + external + confining; }
};

inline EnergyParts energy_parts(const LatticeState& s, const ChainParams& p) {
  s.validate();
  const std::size_t n = s.size();
  EnergyParts e;
  for (std::size_t i = 0; i < n; ++i) {
    e.kinetic += kinetic_energy_site(s.theta_dot[i], s.phi[i], s.phi_dot[i], p);
    e.external += external_potential(s.theta[i], s.phi[i], p);
    e.confining += p.h.h(s.phi[i]);
  }
  for (std::size_t b = 0; b < bond_count(n, p.topology); ++b) {
    const std::size_t i = b, j = (b + 1) % n;
    e.torsional += torsional_potential(s.theta[i], s.theta[j], p);
    e.stacking += stacking_potential(s.theta[i], s.phi[i], s.theta[j], s.phi[j], p);
  }
  return e;
}

/// L = T - (U_t + U_s + U_p + U_c).
inline double discrete_lagrangian(const LatticeState& s, const ChainParams& p) {
  const EnergyParts e = energy_parts(s, p);
  return e.kinetic - e.potential();
}

/// dL/dtheta_i and dL/dphi_i at fixed velocities.
struct SiteGradient {
  std::vector<double> theta, phi;
};

inline SiteGradient lagrangian_gradient(const LatticeState& s, const ChainParams& p) {
  s.validate();
  const std::size_t n = s.size();
  SiteGradient f{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  for (std::size_t i = 0; i < n; ++i) {
    const double th = s.theta[i], ph = s.phi[i];
    const double td = s.theta_dot[i];
    const double sp = std::sin(ph + th);
    f.theta[i] -= p.g * ((p.M + p.m) * p.R * std::sin(th) + p.m * p.r * sp);
    f.phi[i] -= p.g * p.m * p.r * sp + p.h.dh(ph);
    // dT/dphi
    f.phi[i] -= p.m * p.R * p.r * std::sin(ph) * (td * td + td * s.phi_dot[i]);
  }

  for (std::size_t b = 0; b < bond_count(n, p.topology); ++b) {
    const std::size_t i = b, j = (b + 1) % n;
    const double st = p.kappa_t * std::sin(s.theta[j] - s.theta[i]);
    f.theta[i] += st;
    f.theta[j] -= st;

    // Second-bob positions and the bond vector d = p_j - p_i.
    const double ai = s.theta[i], aj = s.theta[j];
    const double bi = s.phi[i] + ai, bj = s.phi[j] + aj;
    const double xi = p.R * std::cos(ai) + p.r * std::cos(bi);
    const double yi = p.R * std::sin(ai) + p.r * std::sin(bi);
    const double xj = p.R * std::cos(aj) + p.r * std::cos(bj);
    const double yj = p.R * std::sin(aj) + p.r * std::sin(bj);
    const double dx = xj - xi, dy = yj - yi;
    // dU/dq_j = kappa_s d . dp_j/dq_j, dU/dq_i = -kappa_s d . dp_i/dq_i
    // with dp/dtheta = (-y, x), dp/dphi = r(-sin b, cos b).
    const double ks = p.kappa_s;
    f.theta[j] -= ks * (dx * -yj + dy * xj);
    f.theta[i] += ks * (dx * -yi + dy * xi);
    f.phi[j] -= ks * p.r * (dx * -std::sin(bj) + dy * std::cos(bj));
    f.phi[i] += ks * p.r * (dx * -std::sin(bi) + dy * std::cos(bi));
  }
  return f;
}

/// Generalized accelerations (theta_dd, phi_dd) per site.
///
/// Per site M(phi) qdd = dL/dq - (dM/dphi phidot) qdot. With r = 0 the second
/// pendulum has no inertia and phi is held fixed.
struct SiteAccel {
  std::vector<double> theta_dd, phi_dd;
};

inline SiteAccel discrete_forces(const LatticeState& s, const ChainParams& p) {
  const SiteGradient f = lagrangian_gradient(s, p);
  const std::size_t n = s.size();
  SiteAccel a{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  const bool frozen = !(p.r > 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = s.phi[i], td = s.theta_dot[i], pd = s.phi_dot[i];
    const double w = p.m * p.R * p.r * std::sin(ph);
    // -(dM/dt) qdot, dM/dphi = -m R r sin(phi) [[2, 1], [1, 0]]
    const double ft = f.theta[i] + w * pd * (2.0 * td + pd);
    const double fp = f.phi[i] + w * pd * td;
    const MassMatrix mm = mass_matrix(ph, p);
    if (frozen) {
      a.theta_dd[i] = ft / mm.tt;
    } else {
      const auto q = mm.solve(ft, fp);
      a.theta_dd[i] = q[0];
      a.phi_dd[i] = q[1];
    }
  }
  return a;
}

}  // namespace pendulon
