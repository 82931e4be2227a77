#pragma once

// Small-parameter expansion of the travelling kink: the second beam and bob
// and the torsional coupling are O(eps), the leading order is a sine-Gordon
// kink, theta gets a linear ODE at each order and phi is fixed algebraically.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "chain.hpp"
#include "errors.hpp"
#include "stencil.hpp"
#include "travelwave.hpp"

namespace pendulon {

/// Expansion coefficients. r = eps r1 + eps^2 r2, R = A - r, m = eps m1 + eps^2 m2,
/// M = Mhat - m, K_t = eps k1 + eps^2 k2, K_s = Khat - K_t, v = v0 + eps v1 + eps^2 v2.
struct ExpansionParams {
  double A = 0.1;      ///< total length R + r [m]
  double Mhat = 0.01;  ///< total mass M + m [kg]
  double Khat = 0.01;  ///< total coupling K_s + K_t
  double g = 9.81;
  double eps = 0.0;
  double r1 = 0.05, r2 = 0.02;
  double m1 = 0.005, m2 = 0.002;
  double k1 = 0.002, k2 = 0.001;
  double v0 = 0.3, v1 = 0.05, v2 = 0.02;
  double delta = 0.005;  ///< lattice spacing used when rebuilding a chain [m]
  ConfiningPotential h = ConfiningPotential::quadratic(0.01, 1.0);

  void validate() const {
    auto need = [](bool ok, const char* what) {
      if (!ok) throw DomainError(std::string("expansion parameters: ") + what);
    };
    need(A > 0.0, "A must be > 0");
    need(Mhat > 0.0, "Mhat must be > 0");
    need(Khat > 0.0, "Khat must be > 0");
    need(g > 0.0, "g must be > 0");
    need(eps >= 0.0, "eps must be >= 0");
    need(delta > 0.0, "delta must be > 0");
    h.validate();
  }

  double speed(double e) const { return v0 + e * (v1 + e * v2); }

  ChainParams to_chain_params(double e) const {
    const double r = e * (r1 + e * r2);
    const double m = e * (m1 + e * m2);
    const double Kt = e * (k1 + e * k2);
    return ChainParams::from_continuum(Mhat - m, m, A - r, r, Kt, Khat - Kt, g, delta, h);
  }
  ChainParams to_chain_params() const { return to_chain_params(eps); }
};

/// mu_hat = Mhat v0^2 - Khat; negative for subsonic kinks.
inline double mu_hat(const ExpansionParams& q) { return q.Mhat * q.v0 * q.v0 - q.Khat; }

/// Coefficients of mu = K_s - m v^2 = mu0 + eps mu1 + eps^2 mu2.
inline std::array<double, 3> mu_series(const ExpansionParams& q) {
  return {q.Khat, -(q.k1 + q.m1 * q.v0 * q.v0),
          -(q.k2 + q.m2 * q.v0 * q.v0 + 2.0 * q.m1 * q.v0 * q.v1)};
}

/// Inverse kink width k = sqrt(Mhat g / (A (Khat - Mhat v0^2))).
inline double kink_k(const ExpansionParams& q) {
  const double mh = mu_hat(q);
  if (!(mh < 0.0))
    throw DomainError("no kink: Mhat v0^2 >= Khat (sonic or supersonic speed)");
  return std::sqrt(q.Mhat * q.g / (-q.A * mh));
}

struct KinkSample {
  double theta, theta_z, theta_zz, sin_theta, cos_theta;
};

/// theta0 = 4 arctan(exp(k z)) with closed-form derivatives; theta0'' = k^2 sin theta0.
inline KinkSample sg_kink(double z, const ExpansionParams& q) {
  const double k = kink_k(q);
  const double x = k * z;
  const double sech = 1.0 / std::cosh(x), th = std::tanh(x);
  return {4.0 * std::atan(std::exp(x)), 2.0 * k * sech, -2.0 * k * k * sech * th,
          -2.0 * sech * th, 1.0 - 2.0 * sech * sech};
}

/// Forcing strength of the order-1 theta equation,
/// theta1'' = k^2 cos(theta0) theta1 + B / (A^3 mu_hat^2) sin(theta0), with
/// B = Mhat g (A mu_hat r1 - (1 - A^2) k1 - 2 A Mhat v0 (r1 v0 - A v1)).
inline double coefficient_B(const ExpansionParams& q) {
  const double C = (1.0 - q.A * q.A) * q.k1 + 2.0 * q.A * q.Mhat * q.v0 * (q.r1 * q.v0 - q.A * q.v1);
  return q.Mhat * q.g * (q.A * mu_hat(q) * q.r1 - C);
}

inline double order1_forcing_scale(const ExpansionParams& q) {
  const double mh = mu_hat(q);
  return coefficient_B(q) / (q.A * q.A * q.A * mh * mh);
}

/// z grid spanning |z| <= widths / k.
inline std::vector<double> kink_z_grid(const ExpansionParams& q, std::size_t n,
                                       double widths = 20.0) {
  return make_z_grid(n, widths / kink_k(q));
}

struct Order1Theta {
  std::vector<double> theta1;
  double sigma = 0.0;  ///< multiplier of the zero-mode border; zero when solvable
};

/// Solve the order-1 theta equation with theta1 = 0 at both ends and
/// <theta1, theta0'> = 0. The border multiplier sigma measures how far the
/// forcing is from the range of the operator.
inline Order1Theta order1_theta_solve(const ExpansionParams& q, const std::vector<double>& z) {
  const std::size_t n = z.size();
  const double k = kink_k(q);
  const double b = order1_forcing_scale(q);
  const Stencil st(n, (z.back() - z.front()) / static_cast<double>(n - 1));

  std::vector<double> f(n), pot(n), zero_mode(n);
  double fmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const KinkSample s = sg_kink(z[j], q);
    f[j] = b * s.sin_theta;
    pot[j] = k * k * s.cos_theta;
    zero_mode[j] = s.theta_z / (2.0 * k);
    fmax = std::max(fmax, std::abs(f[j]));
  }
  if (fmax > 0.0 && std::max(std::abs(f.front()), std::abs(f.back())) > 1e-6 * fmax)
    throw DomainError("order1_theta: grid too small, forcing has not decayed at the ends");

  Order1Theta out;
  out.theta1.assign(n, 0.0);
  if (fmax == 0.0) return out;

  // unknowns theta1[1..n-2], sigma
  const std::size_t m = n - 2;
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + 1));
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const StencilRow r = st.d2(j);
    for (std::size_t c = 0; c < r.len; ++c) {
      const std::size_t p = r.first + c;
      if (p == 0 || p + 1 == n) continue;
      trip.emplace_back(j - 1, p - 1, r.w[c]);
    }
    trip.emplace_back(j - 1, j - 1, -pot[j]);
    trip.emplace_back(j - 1, m, zero_mode[j]);
    trip.emplace_back(m, j - 1, zero_mode[j]);
    rhs[static_cast<Eigen::Index>(j - 1)] = f[j];
  }
  Eigen::SparseMatrix<double> L(static_cast<Eigen::Index>(m + 1), static_cast<Eigen::Index>(m + 1));
  L.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(L);
  if (lu.info() != Eigen::Success) throw NumericalError("order1_theta: singular bordered system");
  const Eigen::VectorXd x = lu.solve(rhs);
  for (std::size_t j = 1; j + 1 < n; ++j) out.theta1[j] = x[static_cast<Eigen::Index>(j - 1)];
  out.sigma = x[static_cast<Eigen::Index>(m)];
  if (std::abs(out.sigma) > 1e-6 * fmax)
    throw NumericalError("order1_theta: solvability condition violated", 0.0, out.sigma);
  return out;
}

inline std::vector<double> order1_theta(const ExpansionParams& q, const std::vector<double>& z) {
  return order1_theta_solve(q, z).theta1;
}

/// phi1 = -Mhat g Khat r1 sin(theta0) / (mu_hat h''(0)); a pointwise relation.
inline double order1_phi_coeff(const ExpansionParams& q) {
  const double h2 = q.h.d2h(0.0);
  if (!(h2 > 0.0)) throw DomainError("slaving relation needs h''(0) > 0");
  return -q.Mhat * q.g * q.Khat * q.r1 / (mu_hat(q) * h2);
}

inline std::vector<double> order1_phi(const ExpansionParams& q, const std::vector<double>& z) {
  const double c = order1_phi_coeff(q);
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = c * sg_kink(z[j], q).sin_theta;
  return out;
}

/// phi2 from the order-2 balance of the second equation, with theta1'' taken
/// from the order-1 theta equation so only theta1 itself is needed.
inline std::vector<double> order2_phi(const ExpansionParams& q, const std::vector<double>& theta1,
                                      const std::vector<double>& phi1,
                                      const std::vector<double>& z) {
  if (theta1.size() != z.size() || phi1.size() != z.size())
    throw DomainError("order2_phi: sample lengths differ from the grid");
  const double h2 = q.h.d2h(0.0), h3 = q.h.d3h(0.0);
  if (!(h2 > 0.0)) throw DomainError("slaving relation needs h''(0) > 0");
  const double k = kink_k(q);
  const double b = order1_forcing_scale(q);
  const double AK = q.A * q.Khat;
  const double c0 = AK * q.r2 - q.A * q.r1 * (q.k1 + q.m1 * q.v0 * q.v0);
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const KinkSample s = sg_kink(z[j], q);
    const double t1zz = k * k * s.cos_theta * theta1[j] + b * s.sin_theta;
    out[j] = (c0 * s.theta_zz + AK * q.r1 * t1zz + AK * q.r1 * s.theta_z * s.theta_z * phi1[j] -
              q.g * q.m1 * q.r1 * s.sin_theta - 0.5 * h3 * phi1[j] * phi1[j]) /
             h2;
  }
  return out;
}

struct PerturbativeSolution {
  ExpansionParams params;
  double k = 0.0;
  double B = 0.0;
  double sigma = 0.0;
  std::vector<double> z;
  std::vector<double> theta0, theta0_z, theta1, theta1_z, phi1, phi1_z, phi2, phi2_z;
};

inline PerturbativeSolution build_perturbative(const ExpansionParams& q,
                                               const std::vector<double>& z) {
  q.validate();
  PerturbativeSolution s;
  s.params = q;
  s.k = kink_k(q);
  s.B = coefficient_B(q);
  s.z = z;
  const std::size_t n = z.size();
  const Stencil st(n, (z.back() - z.front()) / static_cast<double>(n - 1));
  s.theta0.resize(n);
  s.theta0_z.resize(n);
  s.phi1_z.resize(n);
  const double c1 = order1_phi_coeff(q);
  for (std::size_t j = 0; j < n; ++j) {
    const KinkSample ks = sg_kink(z[j], q);
    s.theta0[j] = ks.theta;
    s.theta0_z[j] = ks.theta_z;
    s.phi1_z[j] = c1 * ks.cos_theta * ks.theta_z;
  }
  const Order1Theta o1 = order1_theta_solve(q, z);
  s.theta1 = o1.theta1;
  s.sigma = o1.sigma;
  s.theta1_z = st.first(s.theta1);
  s.phi1 = order1_phi(q, z);
  s.phi2 = order2_phi(q, s.theta1, s.phi1, z);
  s.phi2_z = st.first(s.phi2);
  return s;
}

struct ComposedSeries {
  TWProfile profile;
  ChainParams chain;
};

/// Truncated series at the given order: order 0 is the bare kink, order 1
/// adds eps theta1 and eps phi1, order 2 adds eps^2 phi2.
inline ComposedSeries compose_series(const PerturbativeSolution& s, double eps, int order) {
  if (!(eps >= 0.0)) throw DomainError("compose_series: eps must be >= 0");
  if (order < 0 || order > 2) throw DomainError("compose_series: order must be 0, 1 or 2");
  ComposedSeries out;
  out.chain = s.params.to_chain_params(eps);
  TWProfile& p = out.profile;
  const std::size_t n = s.z.size();
  p.z = s.z;
  p.theta = s.theta0;
  p.theta_z = s.theta0_z;
  p.phi.assign(n, 0.0);
  p.phi_z.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (order >= 1) {
      p.theta[j] += eps * s.theta1[j];
      p.theta_z[j] += eps * s.theta1_z[j];
      p.phi[j] += eps * s.phi1[j];
      p.phi_z[j] += eps * s.phi1_z[j];
    }
    if (order >= 2) {
      p.phi[j] += eps * eps * s.phi2[j];
      p.phi_z[j] += eps * eps * s.phi2_z[j];
    }
  }
  p.tw = TWParams::make(s.params.speed(eps), out.chain);
  p.N = winding_number(p.theta.front(), p.theta.back());
  return out;
}

enum class Field { theta, phi };

/// eps-Taylor coefficients 0..2 of the numerically exact travelling wave.
struct TaylorExtraction {
  std::vector<double> eps;  ///< sample points 0, e0, ..., 4 e0
  std::array<std::vector<double>, 3> theta, phi;
  double condition = 0.0;  ///< condition number of the interpolation matrix
  std::string warning;
};

/// Solve the full travelling-wave problem at eps = 0, e0, 2 e0, 3 e0, 4 e0 and
/// read the coefficients off the interpolating quartic in eps at each z.
inline TaylorExtraction taylor_extract_all(const ExpansionParams& q, const std::vector<double>& z,
                                           double e0, const TWSolveOptions& opt = {}) {
  if (!(e0 > 0.0)) throw DomainError("taylor_extract: step must be > 0");
  const PerturbativeSolution sol = build_perturbative(q, z);
  constexpr int K = 5;
  const std::size_t n = z.size();
  TaylorExtraction ex;
  std::array<TWProfile, K> prof;
  for (int i = 0; i < K; ++i) {
    const double e = e0 * i;
    ex.eps.push_back(e);
    const ComposedSeries guess = compose_series(sol, e, 2);
    prof[i] = solve_tw_bvp(guess.profile, guess.chain, guess.profile.tw, opt);
  }
  // Vandermonde in s = eps / e0
  Eigen::Matrix<double, K, K> V;
  for (int i = 0; i < K; ++i)
    for (int c = 0; c < K; ++c) V(i, c) = std::pow(static_cast<double>(i), c);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(V)};
  ex.condition = svd.singularValues()(0) / svd.singularValues()(K - 1);
  if (ex.condition > 1e8) ex.warning = "ill-conditioned eps extraction";
  const auto lu = V.partialPivLu();
  for (int o = 0; o < 3; ++o) {
    ex.theta[o].resize(n);
    ex.phi[o].resize(n);
  }
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::Matrix<double, K, 1> bt, bp;
    for (int i = 0; i < K; ++i) {
      bt(i) = prof[i].theta[j];
      bp(i) = prof[i].phi[j];
    }
    const Eigen::Matrix<double, K, 1> ct = lu.solve(bt), cp = lu.solve(bp);
    for (int o = 0; o < 3; ++o) {
      const double scale = std::pow(e0, o);
      ex.theta[o][j] = ct(o) / scale;
      ex.phi[o][j] = cp(o) / scale;
    }
  }
  return ex;
}

/// Single coefficient; theta coefficients have the translation mode projected out.
inline std::vector<double> taylor_extract(const ExpansionParams& q, int order, Field field,
                                          const std::vector<double>& z, double e0,
                                          const TWSolveOptions& opt = {}) {
  if (order < 1 || order > 2) throw DomainError("taylor_extract: order must be 1 or 2");
  const TaylorExtraction ex = taylor_extract_all(q, z, e0, opt);
  if (field == Field::phi) return ex.phi[order];
  std::vector<double> t = ex.theta[order];
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double m = sg_kink(z[j], q).theta_z;
    num += t[j] * m;
    den += m * m;
  }
  for (std::size_t j = 0; j < z.size(); ++j) t[j] -= num / den * sg_kink(z[j], q).theta_z;
  return t;
}

/// sqrt(trapezoid integral of f^2).
inline double l2_norm(const std::vector<double>& f, double dz) {
  double s = 0.5 * (f.front() * f.front() + f.back() * f.back());
  for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j] * f[j];
  return std::sqrt(s * dz);
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

struct ScalingRow {
  double eps, res1_l2, res2_l2;
};

struct ScalingReport {
  int order = 0;
  std::vector<ScalingRow> rows;
  double slope1 = 0.0, slope2 = 0.0;
};

/// L2 norms of the residuals of the truncated series against eps.
inline ScalingReport residual_scaling(const ExpansionParams& q, const std::vector<double>& eps_list,
                                      int order, const std::vector<double>& z) {
  if (eps_list.size() < 4) throw DomainError("residual_scaling: need at least 4 eps values");
  double lo = eps_list.front(), hi = eps_list.front();
  for (double e : eps_list) {
    if (!(e > 0.0 && e <= 0.2)) throw DomainError("residual_scaling: eps values must lie in (0, 0.2]");
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (hi < 10.0 * lo * (1.0 - 1e-12))
    throw DomainError("residual_scaling: eps values must span a decade");
  const PerturbativeSolution sol = build_perturbative(q, z);
  ScalingReport rep;
  rep.order = order;
  std::vector<double> e, a, b;
  for (double eps : eps_list) {
    const ComposedSeries cs = compose_series(sol, eps, order);
    const TWResidual r = tw_residual(cs.profile, cs.chain);
    const double dz = cs.profile.dz();
    rep.rows.push_back({eps, l2_norm(r.res1, dz), l2_norm(r.res2, dz)});
    e.push_back(eps);
    a.push_back(rep.rows.back().res1_l2);
    b.push_back(rep.rows.back().res2_l2);
  }
  rep.slope1 = loglog_slope(e, a);
  rep.slope2 = loglog_slope(e, b);
  return rep;
}

}  // namespace pendulon
