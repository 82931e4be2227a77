#pragma once

// Order-by-order pieces of the travelling-wave Lagrangian under the
// small-parameter expansion, with phi0 kept general, and the identities that
// make phi perturbatively auxiliary.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "autodiff.hpp"
#include "errors.hpp"
#include "perturbation.hpp"
#include "stencil.hpp"
#include "travelwave.hpp"

namespace pendulon {

/// Field coefficients at one point: index k is the eps^k term.
struct ExpansionPoint {
  std::array<double, 3> th{}, th_z{}, th_zz{}, ph{}, ph_z{}, ph_zz{};
};

struct ExpandedLagrangianSample {
  ExpansionParams params;
  std::vector<double> z;
  std::vector<ExpansionPoint> pts;

  std::size_t size() const { return pts.size(); }
};

struct LagrangianOrders {
  std::vector<double> L0, L1, L2;
};

namespace detail {

// eps-coefficients of the chain constants
struct ExpandedConstants {
  double A, Mh, Kh, g;
  double r1, r2, m1, m2, k1, k2, v0, v1, v2;
  double mu1, mu2;
  double W0, W1, W2;  // M R^2 v^2
};

inline ExpandedConstants expanded_constants(const ExpansionParams& q) {
  ExpandedConstants c{q.A, q.Mhat, q.Khat, q.g, q.r1, q.r2, q.m1, q.m2, q.k1, q.k2,
                      q.v0, q.v1, q.v2, 0, 0, 0, 0, 0};
  const auto mu = mu_series(q);
  c.mu1 = mu[1];
  c.mu2 = mu[2];
  const double A = q.A, A2 = A * A, v0 = q.v0, v1 = q.v1, v2 = q.v2;
  c.W0 = q.Mhat * A2 * v0 * v0;
  c.W1 = q.Mhat * (2.0 * A2 * v0 * v1 - 2.0 * A * q.r1 * v0 * v0) - q.m1 * A2 * v0 * v0;
  c.W2 = q.Mhat * (A2 * (v1 * v1 + 2.0 * v0 * v2) - 4.0 * A * q.r1 * v0 * v1 +
                   (q.r1 * q.r1 - 2.0 * A * q.r2) * v0 * v0) -
         q.m1 * (2.0 * A2 * v0 * v1 - 2.0 * A * q.r1 * v0 * v0) - q.m2 * A2 * v0 * v0;
  return c;
}

// Coefficients of L_tw = P th'^2/2 + Q ph'^2/2 + S th' ph' + G - h at one point.
struct PointCoefficients {
  double P0, P1, P2, Q2, S1, S2, G0, G1, G2, h0, h1, h2;
};

inline PointCoefficients point_coefficients(const ExpandedConstants& c, const ConfiningPotential& h,
                                            const ExpansionPoint& x) {
  const double c0 = std::cos(x.ph[0]), s0 = std::sin(x.ph[0]);
  const double C0 = std::cos(x.th[0]), S0 = std::sin(x.th[0]);
  const double p1 = x.ph[1], t1 = x.th[1];
  const double A = c.A, r1 = c.r1, r2 = c.r2;
  // r^2 + R^2 + 2 r R cos(phi) and r^2 + r R cos(phi)
  const double beta1 = 2.0 * A * r1 * (c0 - 1.0);
  const double beta2 = 2.0 * (r1 * r1 - A * r2) * (1.0 - c0) - 2.0 * A * r1 * s0 * p1;
  const double alpha1 = A * r1 * c0;
  const double alpha2 = r1 * r1 + (A * r2 - r1 * r1) * c0 - A * r1 * s0 * p1;
  PointCoefficients k{};
  k.P0 = c.W0 - c.Kh * A * A;
  k.P1 = c.W1 - c.k1 - c.Kh * beta1 - c.mu1 * A * A;
  k.P2 = c.W2 - c.k2 - c.Kh * beta2 - c.mu1 * beta1 - c.mu2 * A * A;
  k.Q2 = -c.Kh * r1 * r1;
  k.S1 = -c.Kh * alpha1;
  k.S2 = -c.Kh * alpha2 - c.mu1 * alpha1;
  k.G0 = c.g * c.Mh * A * C0;
  k.G1 = c.g * c.Mh * (-A * S0 * t1 - r1 * C0);
  k.G2 = c.g * c.Mh * (A * (-S0 * x.th[2] - 0.5 * C0 * t1 * t1) + r1 * S0 * t1 - r2 * C0) +
         c.g * c.m1 * r1 * std::cos(x.ph[0] + x.th[0]);
  k.h0 = h.h(x.ph[0]);
  k.h1 = h.dh(x.ph[0]) * p1;
  k.h2 = h.dh(x.ph[0]) * x.ph[2] + 0.5 * h.d2h(x.ph[0]) * p1 * p1;
  return k;
}

}  // namespace detail

/// L0, L1, L2 at every sample point from the closed-form expansion.
inline LagrangianOrders eval_L0_L1_L2(const ExpandedLagrangianSample& s) {
  const detail::ExpandedConstants c = detail::expanded_constants(s.params);
  LagrangianOrders out;
  for (const ExpansionPoint& x : s.pts) {
    const detail::PointCoefficients k = detail::point_coefficients(c, s.params.h, x);
    const double a0 = x.th_z[0], a1 = x.th_z[1], a2 = x.th_z[2];
    const double b0 = x.ph_z[0], b1 = x.ph_z[1];
    out.L0.push_back(0.5 * k.P0 * a0 * a0 + k.G0 - k.h0);
    out.L1.push_back(0.5 * k.P1 * a0 * a0 + k.P0 * a0 * a1 + k.S1 * a0 * b0 + k.G1 - k.h1);
    out.L2.push_back(0.5 * (k.P2 * a0 * a0 + 2.0 * k.P1 * a0 * a1 + k.P0 * (a1 * a1 + 2.0 * a0 * a2)) +
                     0.5 * k.Q2 * b0 * b0 + k.S2 * a0 * b0 + k.S1 * (a1 * b0 + a0 * b1) + k.G2 -
                     k.h2);
  }
  return out;
}

/// Series of the chain constants and of the fields at one point as Jets in eps.
struct JetPoint {
  TWCoeffs<Jet<2>> c;
  Jet<2> th, ph, th_z, ph_z, th_zz, ph_zz;
};

inline JetPoint jet_point(const ExpansionParams& q, const ExpansionPoint& x) {
  using J = Jet<2>;
  const J r = J::series({0.0, q.r1, q.r2}), m = J::series({0.0, q.m1, q.m2});
  const J Kt = J::series({0.0, q.k1, q.k2});
  JetPoint p;
  p.c = {J(q.Mhat) - m, m, J(q.A) - r, r, Kt, J(q.Khat) - Kt, J(q.g), J::series({q.v0, q.v1, q.v2})};
  auto ser = [](const std::array<double, 3>& a) { return J::series({a[0], a[1], a[2]}); };
  p.th = ser(x.th);
  p.ph = ser(x.ph);
  p.th_z = ser(x.th_z);
  p.ph_z = ser(x.ph_z);
  p.th_zz = ser(x.th_zz);
  p.ph_zz = ser(x.ph_zz);
  return p;
}

/// Taylor coefficients 0..2 of L_tw itself with the series substituted.
inline std::array<double, 3> lagrangian_series(const ExpansionParams& q, const ExpansionPoint& x) {
  const JetPoint p = jet_point(q, x);
  const Jet<2> L = tw_lagrangian(p.c, q.h, p.th, p.ph, p.th_z, p.ph_z);
  return {L[0], L[1], L[2]};
}

/// Largest |dL_k / d phi_k'| over the sample, by central differences on the
/// eps-coefficients of L_tw. Values below 1e-10 are returned as 0.
inline double auxiliary_check(const ExpandedLagrangianSample& s, int k) {
  if (k < 0 || k > 2) throw DomainError("auxiliary_check: k must be 0, 1 or 2");
  double worst = 0.0;
  for (const ExpansionPoint& x : s.pts) {
    const double h = 1e-6 * std::max(std::abs(x.ph_z[k]), 1.0);
    ExpansionPoint up = x, dn = x;
    up.ph_z[k] += h;
    dn.ph_z[k] -= h;
    const double d = (lagrangian_series(s.params, up)[k] - lagrangian_series(s.params, dn)[k]) / (2.0 * h);
    worst = std::max(worst, std::abs(d));
  }
  return worst < 1e-10 ? 0.0 : worst;
}

/// Same finite difference with respect to an arbitrary derivative slot, for
/// showing that the check does see dependence where there is some.
inline double lagrangian_slope(const ExpandedLagrangianSample& s, int order, int ph_z_index) {
  double worst = 0.0;
  for (const ExpansionPoint& x : s.pts) {
    const double h = 1e-6 * std::max(std::abs(x.ph_z[ph_z_index]), 1.0);
    ExpansionPoint up = x, dn = x;
    up.ph_z[ph_z_index] += h;
    dn.ph_z[ph_z_index] -= h;
    worst = std::max(worst, std::abs(lagrangian_series(s.params, up)[order] -
                                     lagrangian_series(s.params, dn)[order]) /
                                (2.0 * h));
  }
  return worst;
}

struct ELIdentities {
  std::vector<double> E10, E21, E20;
};

/// E_{k,j}: variation of L_k with respect to phi_j, i.e. dL_k/dphi_j - (dL_k/dphi_j')'.
/// E10 is assembled from L1 and E21 from L2 separately.
inline ELIdentities el_identities(const ExpandedLagrangianSample& s) {
  const ExpansionParams& q = s.params;
  const double A = q.A, K = q.Khat, r1 = q.r1, r2 = q.r2;
  const double mu1 = mu_series(q)[1];
  ELIdentities out;
  for (const ExpansionPoint& x : s.pts) {
    const double c0 = std::cos(x.ph[0]), s0 = std::sin(x.ph[0]);
    const double a0 = x.th_z[0], a1 = x.th_z[1], b0 = x.ph_z[0], b1 = x.ph_z[1];
    const double t0zz = x.th_zz[0], t1zz = x.th_zz[1], p0zz = x.ph_zz[0];
    const double p1 = x.ph[1], p2 = x.ph[2];
    const double hp2 = q.h.d2h(x.ph[0]), hp3 = q.h.d3h(x.ph[0]);

    // from L1 = ... + A K r1 (1 - c0) th0'^2 - A K r1 c0 th0' ph0' - h'(ph0) ph1
    {
      const double dphi = A * K * r1 * s0 * a0 * a0 + A * K * r1 * s0 * a0 * b0 - hp2 * p1;
      const double dmom_z = -A * K * r1 * (c0 * t0zz - s0 * b0 * a0);
      out.E10.push_back(dphi - dmom_z);
    }
    // from the ph1 and ph1' terms of L2
    {
      const double dphi = A * K * r1 * s0 * a0 * a0 + K * A * r1 * s0 * a0 * b0 - hp2 * p1;
      const double mom_z = -K * A * r1 * (c0 * t0zz - s0 * b0 * a0);
      out.E21.push_back(dphi - mom_z);
    }
    // from the ph0 and ph0' dependence of L2
    {
      const double dbeta1 = -2.0 * A * r1 * s0;
      const double dbeta2 = 2.0 * (r1 * r1 - A * r2) * s0 - 2.0 * A * r1 * c0 * p1;
      const double dP2 = -K * dbeta2 - mu1 * dbeta1;
      const double dP1 = -K * dbeta1;
      const double alpha2p1 = -A * r1 * s0;  // d alpha2 / d ph1
      const double dalpha2 = -(A * r2 - r1 * r1) * s0 - A * r1 * c0 * p1;
      const double dS2 = -K * dalpha2 + mu1 * A * r1 * s0;
      const double dS1 = K * A * r1 * s0;
      const double S1 = -K * A * r1 * c0;
      const double S2 = -K * (r1 * r1 + (A * r2 - r1 * r1) * c0 - A * r1 * s0 * p1) - mu1 * A * r1 * c0;
      const double Q2 = -K * r1 * r1;
      const double dphi = 0.5 * dP2 * a0 * a0 + dP1 * a0 * a1 + dS2 * a0 * b0 + dS1 * (a1 * b0 + a0 * b1) -
                          q.g * q.m1 * r1 * std::sin(x.ph[0] + x.th[0]) - hp2 * p2 - 0.5 * hp3 * p1 * p1;
      const double S2_z = dS2 * b0 - K * alpha2p1 * b1;
      const double S1_z = dS1 * b0;
      const double mom_z = Q2 * p0zz + S2_z * a0 + S2 * t0zz + S1_z * a1 + S1 * t1zz;
      out.E20.push_back(dphi - mom_z);
    }
  }
  return out;
}

/// Sample points drawn from a seeded generator. Angles stay inside the
/// confining well (|ph0| < phi0 / 2), everything else is O(1).
inline ExpandedLagrangianSample random_sample(const ExpansionParams& q, std::size_t n,
                                              std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  // explicit conversion so the draws do not depend on the standard library
  auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
  auto sym = [&](double a) { return a * (2.0 * unit() - 1.0); };
  constexpr double kPi = 3.14159265358979323846;
  ExpandedLagrangianSample s;
  s.params = q;
  for (std::size_t j = 0; j < n; ++j) {
    ExpansionPoint x;
    for (int k = 0; k < 3; ++k) {
      x.th[k] = k == 0 ? 2.0 * kPi * unit() : sym(1.0);
      x.th_z[k] = sym(2.0);
      x.th_zz[k] = sym(2.0);
      x.ph[k] = k == 0 ? sym(0.5 * q.h.phi0) : sym(1.0);
      x.ph_z[k] = sym(2.0);
      x.ph_zz[k] = sym(2.0);
    }
    s.z.push_back(static_cast<double>(j));
    s.pts.push_back(x);
  }
  return s;
}

/// Sample built on the perturbative solution (ph0 = 0). Second derivatives of
/// theta0 are closed form; those of theta1 and the phi coefficients use the
/// grid stencil.
inline ExpandedLagrangianSample sample_from_perturbative(const PerturbativeSolution& sol) {
  const std::size_t n = sol.z.size();
  const Stencil st(n, (sol.z.back() - sol.z.front()) / static_cast<double>(n - 1));
  const auto t1zz = st.second(sol.theta1), p1zz = st.second(sol.phi1), p2zz = st.second(sol.phi2);
  ExpandedLagrangianSample s;
  s.params = sol.params;
  s.z = sol.z;
  for (std::size_t j = 0; j < n; ++j) {
    const KinkSample k = sg_kink(sol.z[j], sol.params);
    ExpansionPoint x;
    x.th = {k.theta, sol.theta1[j], 0.0};
    x.th_z = {k.theta_z, sol.theta1_z[j], 0.0};
    x.th_zz = {k.theta_zz, t1zz[j], 0.0};
    x.ph = {0.0, sol.phi1[j], sol.phi2[j]};
    x.ph_z = {0.0, sol.phi1_z[j], sol.phi2_z[j]};
    x.ph_zz = {0.0, p1zz[j], p2zz[j]};
    s.pts.push_back(x);
  }
  return s;
}

/// Agreement of the closed forms with the eps-expansion of L_tw and of the
/// second travelling-wave equation, and the auxiliary-field checks.
struct ExpansionCheck {
  std::array<double, 3> L_rel{};  ///< max |L_k - oracle| / max |oracle|
  std::array<double, 3> aux{};    ///< auxiliary_check for k = 0, 1, 2
  double aux_control = 0.0;       ///< |dL2 / dphi0'|, expected nonzero
  double E10_E21 = 0.0;           ///< max |E10 - E21|
  double E10_rel = 0.0, E20_rel = 0.0;
};

inline ExpansionCheck check_expansion(const ExpandedLagrangianSample& s) {
  const LagrangianOrders L = eval_L0_L1_L2(s);
  const ELIdentities E = el_identities(s);
  std::array<double, 3> num{}, den{};
  double e10n = 0, e10d = 0, e20n = 0, e20d = 0;
  ExpansionCheck c;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const auto t = lagrangian_series(s.params, s.pts[j]);
    const double l[3] = {L.L0[j], L.L1[j], L.L2[j]};
    for (int k = 0; k < 3; ++k) {
      num[k] = std::max(num[k], std::abs(l[k] - t[k]));
      den[k] = std::max(den[k], std::abs(t[k]));
    }
    const JetPoint p = jet_point(s.params, s.pts[j]);
    const Jet<2> e2 = tw_equations(p.c, s.params.h, p.th, p.ph, p.th_z, p.ph_z, p.th_zz, p.ph_zz)[1];
    e10n = std::max(e10n, std::abs(E.E10[j] - e2[1]));
    e10d = std::max(e10d, std::abs(e2[1]));
    e20n = std::max(e20n, std::abs(E.E20[j] - e2[2]));
    e20d = std::max(e20d, std::abs(e2[2]));
    c.E10_E21 = std::max(c.E10_E21, std::abs(E.E10[j] - E.E21[j]));
  }
  for (int k = 0; k < 3; ++k) {
    c.L_rel[k] = den[k] > 0.0 ? num[k] / den[k] : num[k];
    c.aux[k] = auxiliary_check(s, k);
  }
  c.aux_control = lagrangian_slope(s, 2, 0);
  c.E10_rel = e10d > 0.0 ? e10n / e10d : e10n;
  c.E20_rel = e20d > 0.0 ? e20n / e20d : e20n;
  return c;
}

struct SlavingReport {
  std::array<double, 3> A_k{};  ///< max |dL_k / dphi_k| at ph0 = 0
  double phi1_rel = 0.0;        ///< phi1 from E10 = 0 against order1_phi
  double phi2_rel = 0.0;        ///< phi2 from E20 = 0 against order2_phi
  std::vector<double> phi1_el, phi2_el;
};

namespace detail {

inline double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    num = std::max(num, std::abs(a[j] - b[j]));
    den = std::max(den, std::abs(b[j]));
  }
  return den > 0.0 ? num / den : num;
}

}  // namespace detail

/// Slaving relations recovered from the identities. E10 is affine in phi1 and
/// E20 in phi2, so each is solved from two evaluations.
inline SlavingReport slaving_consistency(const ExpansionParams& q, const std::vector<double>& z) {
  const PerturbativeSolution sol = build_perturbative(q, z);
  ExpandedLagrangianSample s = sample_from_perturbative(sol);
  SlavingReport rep;

  for (const ExpansionPoint& x : s.pts) {
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6 * std::max(std::abs(x.ph[k]), 1.0);
      ExpansionPoint up = x, dn = x;
      up.ph[k] += h;
      dn.ph[k] -= h;
      const double d = (lagrangian_series(q, up)[k] - lagrangian_series(q, dn)[k]) / (2.0 * h);
      rep.A_k[k] = std::max(rep.A_k[k], std::abs(d));
    }
  }
  for (double& a : rep.A_k)
    if (a < 1e-10) a = 0.0;

  auto solve_affine = [&](int slot, auto pick) {
    ExpandedLagrangianSample s0 = s, s1 = s;
    for (auto& x : s0.pts) x.ph[slot] = 0.0;
    for (auto& x : s1.pts) x.ph[slot] = 1.0;
    const ELIdentities e0 = el_identities(s0), e1 = el_identities(s1);
    const auto& f0 = pick(e0);
    const auto& f1 = pick(e1);
    std::vector<double> out(f0.size());
    for (std::size_t j = 0; j < f0.size(); ++j) out[j] = -f0[j] / (f1[j] - f0[j]);
    return out;
  };
  rep.phi1_el = solve_affine(1, [](const ELIdentities& e) -> const std::vector<double>& { return e.E10; });
  rep.phi1_rel = detail::max_rel(rep.phi1_el, sol.phi1);
  // E20 with phi1 at its slaved value
  rep.phi2_el = solve_affine(2, [](const ELIdentities& e) -> const std::vector<double>& { return e.E20; });
  // end points carry no equation for theta1
  std::vector<double> a(rep.phi2_el.begin() + 1, rep.phi2_el.end() - 1);
  std::vector<double> b(sol.phi2.begin() + 1, sol.phi2.end() - 1);
  rep.phi2_rel = detail::max_rel(a, b);
  return rep;
}

}  // namespace pendulon
