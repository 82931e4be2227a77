#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>

#include "autodiff.hpp"
#include "errors.hpp"

namespace pendulon {

/// Even, convex potential limiting the second pendulum to |phi| < phi0.
///
/// quadratic:        h = c2 phi^2 / 2
/// tangent-barrier:  h = a tan^2(q phi) + b tan^4(q phi),  q = pi / (2 phi0),
///                   a = c2 / (2 q^2), so that h''(0) = c2 in both families.
/// The barrier diverges at |phi| -> phi0; the optional b term steepens the wall
/// without changing h''(0).
struct ConfiningPotential {
  enum class Family { quadratic, tangent_barrier };

  Family family = Family::quadratic;
  double phi0 = 1.0;
  double c2 = 1.0;
  double b = 0.0;

  static ConfiningPotential quadratic(double c2, double phi0 = 1.0) {
    return {Family::quadratic, phi0, c2, 0.0};
  }
  static ConfiningPotential tangent_barrier(double c2, double phi0, double b = 0.0) {
    return {Family::tangent_barrier, phi0, c2, b};
  }

  void validate() const {
    if (!(phi0 > 0.0)) throw DomainError("confining potential: phi0 must be > 0");
    if (!(c2 > 0.0)) throw DomainError("confining potential: c2 = h''(0) must be > 0");
    if (!(b >= 0.0)) throw DomainError("confining potential: b must be >= 0");
  }

  double wall_rate() const { return std::numbers::pi / (2.0 * phi0); }

  template <class T>
  T h(const T& phi) const {
    using std::tan;
    if (family == Family::quadratic) return T(0.5 * c2) * phi * phi;
    if constexpr (std::is_same_v<T, double>) {
      if (std::abs(phi) >= phi0) return std::numeric_limits<double>::infinity();
    }
    const double q = wall_rate();
    const T t = tan(T(q) * phi);
    const T t2 = t * t;
    return T(c2 / (2.0 * q * q)) * t2 + T(b) * t2 * t2;
  }

  /// h'(phi), closed form.
  template <class T>
  T dh(const T& phi) const {
    using std::tan;
    if (family == Family::quadratic) return T(c2) * phi;
    if constexpr (std::is_same_v<T, double>) {
      if (std::abs(phi) >= phi0)
        return std::copysign(std::numeric_limits<double>::infinity(), phi);
    }
    const double q = wall_rate();
    const double a = c2 / (2.0 * q * q);
    const T t = tan(T(q) * phi);
    const T t2 = t * t;
    return T(q) * (T(1.0) + t2) * (T(2.0 * a) * t + T(4.0 * b) * t2 * t);
  }

  /// h''(phi), from the Taylor expansion of h'.
  double d2h(double phi) const { return dh(Jet<2>::variable(phi))[1]; }
  /// h'''(phi).
  double d3h(double phi) const { return 2.0 * dh(Jet<2>::variable(phi))[2]; }
  /// h''''(phi).
  double d4h(double phi) const { return 6.0 * dh(Jet<3>::variable(phi))[3]; }

  std::string_view family_name() const {
    return family == Family::quadratic ? "quadratic" : "tangent-barrier";
  }
};

inline ConfiningPotential::Family parse_family(std::string_view s) {
  if (s == "quadratic") return ConfiningPotential::Family::quadratic;
  if (s == "tangent-barrier") return ConfiningPotential::Family::tangent_barrier;
  throw DomainError("unknown confining potential family '" + std::string(s) + "'");
}

/// Lift h' to a Dual by the chain rule, so Jacobians use the closed-form h''.
template <std::size_t N>
Dual<N> dh_lifted(const ConfiningPotential& pot, const Dual<N>& phi) {
  return chain(phi, pot.dh(phi.v), pot.d2h(phi.v));
}
template <std::size_t N>
Jet<N> dh_lifted(const ConfiningPotential& pot, const Jet<N>& phi) {
  return pot.dh(phi);
}
inline double dh_lifted(const ConfiningPotential& pot, double phi) { return pot.dh(phi); }

}  // namespace pendulon
