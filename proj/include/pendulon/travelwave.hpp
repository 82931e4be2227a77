#pragma once

// Travelling-wave reduction q(x, t) = q(x - v t): residuals of the two
// ordinary differential equations, their Lagrangian and first integral, and a
// collocation Newton solver for kink connections.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "autodiff.hpp"
#include "chain.hpp"
#include "continuum.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "stencil.hpp"

namespace pendulon {

struct TWParams {
  double v = 0.0;
  double mu = 0.0;  ///< K_s - m v^2

  static TWParams make(double v, const ChainParams& p) { return {v, p.Ks() - p.m * v * v}; }
};

struct TWProfile {
  std::vector<double> z, theta, phi, theta_z, phi_z;
  TWParams tw;
  int N = 0;

  std::size_t size() const { return z.size(); }
  double dz() const { return (z.back() - z.front()) / static_cast<double>(z.size() - 1); }

  void validate() const {
    const std::size_t n = z.size();
    if (n < 6) throw DomainError("TW profile: need at least 6 points");
    if (theta.size() != n || phi.size() != n || theta_z.size() != n || phi_z.size() != n)
      throw DomainError("TW profile: mismatched array lengths");
  }
};

/// n uniform points on [-half_width, half_width].
inline std::vector<double> make_z_grid(std::size_t n, double half_width) {
  if (n < 6) throw DomainError("z grid: need at least 6 points");
  if (!(half_width > 0.0)) throw DomainError("z grid: half width must be > 0");
  std::vector<double> z(n);
  const double h = 2.0 * half_width / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) z[j] = -half_width + h * static_cast<double>(j);
  return z;
}

/// Profile sampled from a function returning (theta, phi, theta_z, phi_z).
inline TWProfile profile_from(const std::vector<double>& z, TWParams tw,
                              const std::function<ProfileSample(double)>& f) {
  TWProfile p;
  p.z = z;
  p.tw = tw;
  const std::size_t n = z.size();
  p.theta.resize(n);
  p.phi.resize(n);
  p.theta_z.resize(n);
  p.phi_z.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const ProfileSample s = f(z[j]);
    p.theta[j] = s.theta;
    p.phi[j] = s.phi;
    p.theta_z[j] = s.theta_z;
    p.phi_z[j] = s.phi_z;
  }
  p.N = winding_number(p.theta.front(), p.theta.back());
  return p;
}

/// Cubic Hermite interpolation of a profile; constant beyond the ends.
inline ProfileSample sample_profile(const TWProfile& p, double z) {
  const std::size_t n = p.size();
  if (z <= p.z.front()) return {p.theta.front(), p.phi.front(), 0.0, 0.0};
  if (z >= p.z.back()) return {p.theta.back(), p.phi.back(), 0.0, 0.0};
  const double h = p.dz();
  auto j = static_cast<std::size_t>((z - p.z.front()) / h);
  j = std::min(j, n - 2);
  const double s = (z - p.z[j]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -d00, d11 = 3 * s * s - 2 * s;
  auto herm = [&](const std::vector<double>& f, const std::vector<double>& df) {
    return std::array<double, 2>{
        h00 * f[j] + h10 * h * df[j] + h01 * f[j + 1] + h11 * h * df[j + 1],
        (d00 * f[j] + d10 * h * df[j] + d01 * f[j + 1] + d11 * h * df[j + 1]) / h};
  };
  const auto t = herm(p.theta, p.theta_z), f = herm(p.phi, p.phi_z);
  return {t[0], f[0], t[1], f[1]};
}

/// Chain constants entering the travelling-wave equations, templated so the
/// same expressions can be expanded in a small parameter or differentiated.
template <class T>
struct TWCoeffs {
  T M, m, R, r, Kt, Ks, g, v;

  template <class U>
  TWCoeffs<U> lift() const {
    return {U(M), U(m), U(R), U(r), U(Kt), U(Ks), U(g), U(v)};
  }
};

inline TWCoeffs<double> tw_coeffs(const ChainParams& p, double v) {
  return {p.M, p.m, p.R, p.r, p.Kt(), p.Ks(), p.g, v};
}

/// Kink of the first equation with phi = 0, D theta'' = F sin(theta). For D > 0
/// it is the ordinary kink 0 -> 2 pi, for D < 0 the inverted one pi -> 3 pi.
struct FrozenKink {
  double k = 0.0;
  bool inverted = false;
};

inline FrozenKink frozen_kink(const ChainParams& p, double v) {
  const double L = p.r + p.R;
  const double D = p.Kt() + (p.Ks() - p.m * v * v) * L * L - p.M * p.R * p.R * v * v;
  const double F = p.g * ((p.M + p.m) * p.R + p.m * p.r);
  if (D == 0.0 || !(F > 0.0)) throw DomainError("frozen kink: degenerate coefficients");
  return {std::sqrt(F / std::abs(D)), D < 0.0};
}

/// Sampled kink of frozen_kink(p, v) centred at z = 0.
inline TWProfile frozen_kink_profile(const std::vector<double>& z, const ChainParams& p, double v) {
  const FrozenKink fk = frozen_kink(p, v);
  const double base = fk.inverted ? 3.14159265358979323846 : 0.0;
  return profile_from(z, TWParams::make(v, p), [fk, base](double x) {
    ProfileSample s;
    s.theta = base + 4.0 * std::atan(std::exp(fk.k * x));
    s.theta_z = 2.0 * fk.k / std::cosh(fk.k * x);
    return s;
  });
}

/// Left-hand sides of the two travelling-wave equations. They equal minus the
/// Euler-Lagrange expressions of tw_lagrangian.
template <class T>
std::array<T, 2> tw_equations(const TWCoeffs<T>& c, const ConfiningPotential& h, const T& th,
                              const T& ph, const T& thz, const T& phz, const T& thzz,
                              const T& phzz) {
  using std::cos;
  using std::sin;
  const T mu = c.Ks - c.m * c.v * c.v;
  const T cp = cos(ph), sp = sin(ph);
  const T rR = c.r * c.R;
  const T ra = r2alpha(c.r, c.R, cp), rb = r2beta(c.r, c.R, cp);
  const T spt = sin(ph + th);
  const T two(2.0);
  T e1 = mu * ra * phzz + (c.Kt - c.M * c.R * c.R * c.v * c.v + mu * rb) * thzz -
         mu * rR * sp * phz * phz - two * mu * rR * sp * phz * thz -
         c.g * ((c.M + c.m) * c.R * sin(th) + c.m * c.r * spt);
  T e2 = mu * c.r * c.r * phzz + mu * ra * thzz + mu * rR * thz * thz * sp - dh_lifted(h, ph) -
         c.g * c.m * c.r * spt;
  return {e1, e2};
}

/// L_tw = (1/2) P th'^2 + (1/2) Q ph'^2 + S th' ph' + G - h(ph).
template <class T>
T tw_lagrangian(const TWCoeffs<T>& c, const ConfiningPotential& h, const T& th, const T& ph,
                const T& thz, const T& phz) {
  using std::cos;
  const T mu = c.Ks - c.m * c.v * c.v;
  const T cp = cos(ph);
  const T P = c.M * c.R * c.R * c.v * c.v - c.Kt - mu * r2beta(c.r, c.R, cp);
  const T Q = -mu * c.r * c.r;
  const T S = -mu * r2alpha(c.r, c.R, cp);
  const T G = c.g * ((c.M + c.m) * c.R * cos(th) + c.m * c.r * cos(ph + th));
  const T half(0.5);
  return half * P * thz * thz + half * Q * phz * phz + S * thz * phz + G - h.h(ph);
}

/// th' dL/dth' + ph' dL/dph' - L; constant along exact solutions.
template <class T>
T tw_hamiltonian(const TWCoeffs<T>& c, const ConfiningPotential& h, const T& th, const T& ph,
                 const T& thz, const T& phz) {
  using std::cos;
  const T mu = c.Ks - c.m * c.v * c.v;
  const T cp = cos(ph);
  const T P = c.M * c.R * c.R * c.v * c.v - c.Kt - mu * r2beta(c.r, c.R, cp);
  const T Q = -mu * c.r * c.r;
  const T S = -mu * r2alpha(c.r, c.R, cp);
  const T G = c.g * ((c.M + c.m) * c.R * cos(th) + c.m * c.r * cos(ph + th));
  const T half(0.5);
  return half * P * thz * thz + half * Q * phz * phz + S * thz * phz - G + h.h(ph);
}

inline double tw_lagrangian_density(double theta, double phi, double theta_z, double phi_z,
                                    const TWParams& tw, const ChainParams& p) {
  return tw_lagrangian(tw_coeffs(p, tw.v), p.h, theta, phi, theta_z, phi_z);
}

struct TWResidual {
  std::vector<double> res1, res2;

  double max_abs() const {
    double m = 0.0;
    for (double x : res1) m = std::max(m, std::abs(x));
    for (double x : res2) m = std::max(m, std::abs(x));
    return m;
  }
};

/// Residuals at every grid point, with fourth-order differences for all
/// z-derivatives (one-sided rows at the two points next to each end).
inline TWResidual tw_residual(const TWProfile& prof, const ChainParams& p) {
  prof.validate();
  const std::size_t n = prof.size();
  const Stencil st(n, prof.dz());
  const auto tz = st.first(prof.theta), tzz = st.second(prof.theta);
  const auto pz = st.first(prof.phi), pzz = st.second(prof.phi);
  const TWCoeffs<double> c = tw_coeffs(p, prof.tw.v);
  TWResidual r{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    const auto e = tw_equations(c, p.h, prof.theta[j], prof.phi[j], tz[j], pz[j], tzz[j], pzz[j]);
    r.res1[j] = e[0];
    r.res2[j] = e[1];
  }
  return r;
}

/// First integral along the profile, using its stored derivatives.
inline std::vector<double> tw_first_integral(const TWProfile& prof, const ChainParams& p) {
  prof.validate();
  const TWCoeffs<double> c = tw_coeffs(p, prof.tw.v);
  std::vector<double> e(prof.size());
  for (std::size_t j = 0; j < prof.size(); ++j)
    e[j] = tw_hamiltonian(c, p.h, prof.theta[j], prof.phi[j], prof.theta_z[j], prof.phi_z[j]);
  return e;
}

/// Var(x) / mean(x)^2.
inline double relative_variance(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  return var / (mean * mean);
}

struct TWSolveOptions {
  int max_iter = 60;
  double tol = 1e-10;  ///< L-infinity of the collocation residual
  int polish = 3;      ///< extra full Newton steps after convergence, kept if they help
};

struct TWSolveInfo {
  int iterations = 0;
  double residual = 0.0;  ///< L-infinity of tw_residual at interior points
  double sigma = 0.0;     ///< multiplier of the translation border
  double first_integral_variance = 0.0;
};

namespace detail {

struct TWSystem {
  const ChainParams& p;
  TWCoeffs<double> c;
  Stencil st;
  std::vector<double> psi;  ///< border direction (normalised guess theta')
  std::size_t n;
  std::size_t pin_a, pin_b;
  double pin_value;

  std::size_t unknowns() const { return 2 * (n - 2) + 1; }

  void unpack(const Eigen::VectorXd& u, std::vector<double>& th, std::vector<double>& ph) const {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      th[j] = u[2 * (j - 1)];
      ph[j] = u[2 * (j - 1) + 1];
    }
  }

  // Collocation residual: interior equations, first one bordered by sigma psi,
  // then the pin.
  Eigen::VectorXd residual(const Eigen::VectorXd& u, std::vector<double>& th,
                           std::vector<double>& ph) const {
    unpack(u, th, ph);
    const double sigma = u[unknowns() - 1];
    Eigen::VectorXd F(unknowns());
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const StencilRow r1 = st.d1(j), r2 = st.d2(j);
      const auto e = tw_equations(c, p.h, th[j], ph[j], st.apply(r1, th), st.apply(r1, ph),
                                  st.apply(r2, th), st.apply(r2, ph));
      F[2 * (j - 1)] = e[0] + sigma * psi[j];
      F[2 * (j - 1) + 1] = e[1];
    }
    F[unknowns() - 1] = 0.5 * (th[pin_a] + th[pin_b]) - pin_value;
    return F;
  }

  Eigen::SparseMatrix<double> jacobian(const std::vector<double>& th,
                                       const std::vector<double>& ph) const {
    using D = Dual<6>;
    const TWCoeffs<D> cd = c.template lift<D>();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * (n - 2) * 24 + n);
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const StencilRow r1 = st.d1(j), r2 = st.d2(j);
      const auto e =
          tw_equations(cd, p.h, D::seed(th[j], 0), D::seed(ph[j], 1),
                       D::seed(st.apply(r1, th), 2), D::seed(st.apply(r1, ph), 3),
                       D::seed(st.apply(r2, th), 4), D::seed(st.apply(r2, ph), 5));
      for (int q = 0; q < 2; ++q) {
        const std::size_t row = 2 * (j - 1) + static_cast<std::size_t>(q);
        // d2 rows cover the d1 rows' points
        for (std::size_t k = 0; k < r2.len; ++k) {
          const std::size_t col_pt = r2.first + k;
          if (col_pt == 0 || col_pt + 1 == n) continue;
          double w1 = 0.0;
          if (col_pt >= r1.first && col_pt < r1.first + r1.len) w1 = r1.w[col_pt - r1.first];
          const double w2 = r2.w[k];
          double dt = e[q].d[2] * w1 + e[q].d[4] * w2;
          double dp = e[q].d[3] * w1 + e[q].d[5] * w2;
          if (col_pt == j) {
            dt += e[q].d[0];
            dp += e[q].d[1];
          }
          trip.emplace_back(row, 2 * (col_pt - 1), dt);
          trip.emplace_back(row, 2 * (col_pt - 1) + 1, dp);
        }
      }
      trip.emplace_back(2 * (j - 1), unknowns() - 1, psi[j]);
    }
    trip.emplace_back(unknowns() - 1, 2 * (pin_a - 1), 0.5);
    trip.emplace_back(unknowns() - 1, 2 * (pin_b - 1), 0.5);
    Eigen::SparseMatrix<double> J(static_cast<Eigen::Index>(unknowns()),
                                  static_cast<Eigen::Index>(unknowns()));
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }
};

inline double inf_norm(const Eigen::VectorXd& v) {
  return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0;
}

}  // namespace detail

/// Damped Newton on the collocation system for the travelling-wave equations.
///
/// The end values of the guess are kept as Dirichlet data. Translation is fixed
/// by pinning theta at the centre of the grid to the mean of the two end
/// values; the first equation is bordered with sigma * theta'_guess so the
/// system stays square.
inline TWProfile solve_tw_bvp(const TWProfile& guess, const ChainParams& p, const TWParams& tw,
                              const TWSolveOptions& opt = {}, TWSolveInfo* info = nullptr) {
  guess.validate();
  p.validate();
  if (tw.mu == 0.0) throw DomainError("solve_tw_bvp: mu = 0 makes the equations degenerate");
  const std::size_t n = guess.size();
  const int N = winding_number(guess.theta.front(), guess.theta.back());

  detail::TWSystem sys{p, tw_coeffs(p, tw.v), Stencil(n, guess.dz()), {}, n, 0, 0, 0.0};
  sys.psi = sys.st.first(guess.theta);
  double pmax = 0.0;
  for (double x : sys.psi) pmax = std::max(pmax, std::abs(x));
  if (pmax > 0.0)
    for (double& x : sys.psi) x /= pmax;
  sys.pin_a = (n - 1) / 2;
  sys.pin_b = n / 2;
  sys.pin_value = 0.5 * (guess.theta.front() + guess.theta.back());

  std::vector<double> th = guess.theta, ph = guess.phi;
  Eigen::VectorXd u(sys.unknowns());
  for (std::size_t j = 1; j + 1 < n; ++j) {
    u[2 * (j - 1)] = th[j];
    u[2 * (j - 1) + 1] = ph[j];
  }
  u[sys.unknowns() - 1] = 0.0;

  Eigen::VectorXd F = sys.residual(u, th, ph);
  double fnorm = F.norm();
  int it = 0;
  int polished = 0;
  bool converged = detail::inf_norm(F) < opt.tol;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  while (!converged || polished < opt.polish) {
    if (it >= opt.max_iter) break;
    ++it;
    sys.unpack(u, th, ph);
    const Eigen::SparseMatrix<double> J = sys.jacobian(th, ph);
    lu.compute(J);
    if (lu.info() != Eigen::Success)
      throw NumericalError("solve_tw_bvp: singular Jacobian at iteration " + std::to_string(it),
                           it, detail::inf_norm(F));
    const Eigen::VectorXd du = lu.solve(-F);
    if (!du.allFinite())
      throw NumericalError("solve_tw_bvp: Newton step is not finite", it, detail::inf_norm(F));

    double lam = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial, Ft;
    for (int back = 0; back < 12; ++back, lam *= 0.5) {
      trial = u + lam * du;
      Ft = sys.residual(trial, th, ph);
      if (Ft.allFinite() && Ft.norm() < fnorm * (1.0 - 1e-4 * lam)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (converged) break;  // at the rounding floor
      throw NumericalError("solve_tw_bvp: line search failed at iteration " + std::to_string(it),
                           it, detail::inf_norm(F));
    }
    u = trial;
    F = Ft;
    fnorm = F.norm();
    if (converged) ++polished;
    converged = converged || detail::inf_norm(F) < opt.tol;
  }
  if (!converged)
    throw NumericalError("solve_tw_bvp: no convergence after " + std::to_string(it) +
                             " iterations, residual " + std::to_string(detail::inf_norm(F)),
                         it, detail::inf_norm(F));

  sys.unpack(u, th, ph);
  TWProfile out;
  out.z = guess.z;
  out.theta = th;
  out.phi = ph;
  out.theta_z = sys.st.first(th);
  out.phi_z = sys.st.first(ph);
  out.tw = tw;
  out.N = N;
  if (info) {
    const TWResidual r = tw_residual(out, p);
    info->iterations = it;
    info->sigma = u[sys.unknowns() - 1];
    double m = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) m = std::max({m, std::abs(r.res1[j]), std::abs(r.res2[j])});
    info->residual = m;
    info->first_integral_variance = relative_variance(tw_first_integral(out, p));
  }
  return out;
}

}  // namespace pendulon
