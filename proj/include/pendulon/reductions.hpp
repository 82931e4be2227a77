#pragma once

// Frozen second pendulum (phi = 0): the two travelling-wave equations become
// two determinations of theta'' and are compatible only at one speed.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "chain.hpp"
#include "errors.hpp"
#include "stencil.hpp"
#include "travelwave.hpp"

namespace pendulon {

struct SpeedSelection {
  double mu_star = 0.0;
  double v_star = 0.0;  ///< positive member of the +/- pair
};

/// mu = -K_s R / r.
inline double compatibility_mu(const ChainParams& p) {
  if (!(p.r > 0.0)) throw DomainError("compatibility_mu: undefined for r = 0");
  return -p.Ks() * p.R / p.r;
}

/// v = sqrt(K_s (r + R) / (m r)).
inline SpeedSelection selected_speed(const ChainParams& p) {
  if (!(p.r > 0.0) || !(p.m > 0.0)) throw DomainError("selected_speed: needs r > 0 and m > 0");
  SpeedSelection s;
  s.mu_star = -p.Ks() * p.R / p.r;
  s.v_star = std::sqrt(p.Ks() * (p.r + p.R) / (p.m * p.r));
  const double mu = p.Ks() - p.m * s.v_star * s.v_star;
  if (std::abs(mu - s.mu_star) > 1e-12 * std::max(1.0, std::abs(s.mu_star)))
    throw NumericalError("selected_speed: mu = K_s - m v^2 does not reproduce the compatibility value");
  return s;
}

/// Coefficients of the two reduced equations c_i theta'' + f_i sin(theta) = 0.
///
/// These are written for the angle psi = theta - pi measured from the
/// inverted position, which is where the frozen-phi kinks live when mu < 0:
/// in that variable both gravity terms enter with a plus sign.
struct ReducedCoefficients {
  double c1, f1, c2, f2;
};

inline ReducedCoefficients reduced_coefficients(const ChainParams& p, double v) {
  if (p.Kt() != 0.0) throw DomainError("reduced equations assume K_t = 0");
  if (p.h.dh(0.0) != 0.0) throw DomainError("reduced equations assume h'(0) = 0");
  const double rho = p.rho();
  const double mu = p.Ks() - p.m * v * v;
  const double r = p.r, R = p.R;
  return {mu * (2.0 * r * R + r * r + R * R * (1.0 + rho)) - p.Ks() * R * R * rho,
          p.g * p.m * (r + R + R * rho), mu * r * (r + R), p.g * p.m * r};
}

/// Residuals of the two reduced equations on samples of psi(z).
inline TWResidual reduced_equations_residual(const std::vector<double>& z,
                                             const std::vector<double>& psi, const ChainParams& p,
                                             double v) {
  if (z.size() != psi.size()) throw DomainError("reduced_equations_residual: length mismatch");
  const ReducedCoefficients c = reduced_coefficients(p, v);
  const Stencil st(z.size(), (z.back() - z.front()) / static_cast<double>(z.size() - 1));
  const auto tzz = st.second(psi);
  TWResidual r{std::vector<double>(z.size()), std::vector<double>(z.size())};
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double s = std::sin(psi[j]);
    r.res1[j] = c.c1 * tzz[j] + c.f1 * s;
    r.res2[j] = c.c2 * tzz[j] + c.f2 * s;
  }
  return r;
}

/// Pointwise theta'' implied by each reduced equation; relative mismatch
/// max |d1 - d2| / max |d2|.
inline double proportionality_mismatch(const std::vector<double>& psi, const ChainParams& p,
                                       double v) {
  const ReducedCoefficients c = reduced_coefficients(p, v);
  if (c.c2 == 0.0 || c.c1 == 0.0) throw DomainError("proportionality: degenerate coefficient");
  double num = 0.0, den = 0.0;
  for (double x : psi) {
    const double s = std::sin(x);
    const double d1 = -c.f1 * s / c.c1, d2 = -c.f2 * s / c.c2;
    num = std::max(num, std::abs(d1 - d2));
    den = std::max(den, std::abs(d2));
  }
  return den > 0.0 ? num / den : 0.0;
}

/// Inverse width of the frozen-phi kink implied by the second reduced
/// equation, k^2 = g m / (|mu| (r + R)); at the selected speed it is
/// g m r / (K_s R (r + R)).
inline double reduced_kink_k(const ChainParams& p, double v) {
  const ReducedCoefficients c = reduced_coefficients(p, v);
  if (!(c.c2 < 0.0)) throw DomainError("reduced kink needs mu < 0");
  return std::sqrt(-c.f2 / c.c2);
}

/// Inverted kink theta = pi + 4 arctan(exp(k z)) at speed v with phi = 0.
inline TWProfile inverted_kink_guess(const std::vector<double>& z, const ChainParams& p, double v) {
  if (!frozen_kink(p, v).inverted)
    throw DomainError("no inverted kink: theta'' coefficient is not negative");
  return frozen_kink_profile(z, p, v);
}

struct StiffCell {
  double h2 = 0.0, v = 0.0;
  bool converged = false;
  double max_abs_phi = 0.0;
  double residual = 0.0;         ///< solver residual (L-infinity)
  double frozen_residual = 0.0;  ///< second equation at phi = 0 on the converged theta
  std::string message;
};

struct StiffReport {
  std::vector<StiffCell> cells;  ///< ladder-major order
  std::vector<double> window;    ///< per ladder value: speed range with max|phi| < 0.1 phi0
};

/// Grid shared by all cells: |z| <= widths / k at the selected speed.
inline std::vector<double> stiff_z_grid(const ChainParams& base, std::size_t n = 1000,
                                        double widths = 20.0) {
  const SpeedSelection sel = selected_speed(base);
  return make_z_grid(n, widths / reduced_kink_k(base, sel.v_star));
}

/// One cell: stiffness h2 = h''(0) (the potential's c2), probe speed v.
inline StiffCell stiff_cell(const ChainParams& base, double h2, double v,
                            const std::vector<double>& z) {
  ChainParams p = base;
  p.h.c2 = h2;
  StiffCell cell;
  cell.h2 = h2;
  cell.v = v;
  try {
    const TWProfile guess = inverted_kink_guess(z, p, v);
    TWSolveInfo info;
    const TWProfile sol = solve_tw_bvp(guess, p, guess.tw, {}, &info);
    cell.converged = true;
    cell.residual = info.residual;
    for (double f : sol.phi) cell.max_abs_phi = std::max(cell.max_abs_phi, std::abs(f));
    const TWCoeffs<double> c = tw_coeffs(p, v);
    const Stencil st(z.size(), sol.dz());
    const auto tz = st.first(sol.theta), tzz = st.second(sol.theta);
    for (std::size_t j = 1; j + 1 < z.size(); ++j) {
      const auto e = tw_equations(c, p.h, sol.theta[j], 0.0, tz[j], 0.0, tzz[j], 0.0);
      cell.frozen_residual = std::max(cell.frozen_residual, std::abs(e[1]));
    }
  } catch (const std::exception& e) {
    cell.converged = false;
    cell.message = e.what();
  }
  return cell;
}

/// Per ladder value, the spread of probe speeds whose solution stays within
/// 0.1 phi0. Cells are in ladder-major order.
inline std::vector<double> stiff_windows(const std::vector<StiffCell>& cells, std::size_t ladder,
                                         double phi0) {
  if (ladder == 0 || cells.size() % ladder != 0)
    throw DomainError("stiff_windows: cell count is not a multiple of the ladder size");
  const std::size_t probes = cells.size() / ladder;
  std::vector<double> w;
  for (std::size_t i = 0; i < ladder; ++i) {
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < probes; ++j) {
      const StiffCell& c = cells[i * probes + j];
      if (!c.converged || !(c.max_abs_phi < 0.1 * phi0)) continue;
      lo = any ? std::min(lo, c.v) : c.v;
      hi = any ? std::max(hi, c.v) : c.v;
      any = true;
    }
    w.push_back(any ? hi - lo : 0.0);
  }
  return w;
}

/// For each stiffness and probe speed, solve the travelling-wave problem from
/// the inverted-kink guess. Failures are recorded, not thrown.
inline StiffReport stiff_limit_experiment(const ChainParams& base, const std::vector<double>& ladder,
                                          const std::vector<double>& probes, std::size_t n = 1000,
                                          double widths = 20.0) {
  if (ladder.empty() || probes.empty()) throw DomainError("stiff experiment: empty ladder or probes");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] > ladder[i - 1])) throw DomainError("stiffness ladder must be increasing");
  const std::vector<double> z = stiff_z_grid(base, n, widths);
  StiffReport rep;
  for (double h2 : ladder)
    for (double v : probes) rep.cells.push_back(stiff_cell(base, h2, v, z));
  rep.window = stiff_windows(rep.cells, ladder.size(), base.h.phi0);
  return rep;
}

}  // namespace pendulon
