#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>

namespace pendulon {

/// Truncated power series c0 + c1 t + ... + cN t^N.
///
/// Arithmetic is exact up to order N, so evaluating any smooth expression
/// on a Jet gives its Taylor coefficients in t to rounding error. Used to
/// expand Lagrangians and field equations in the small parameter.
template <std::size_t N>
struct Jet {
  std::array<double, N + 1> c{};

  constexpr Jet() = default;
  constexpr Jet(double v) { c[0] = v; }  // NOLINT: implicit lift is intended

  static Jet variable(double v0) {
    Jet j(v0);
    if constexpr (N >= 1) j.c[1] = 1.0;
    return j;
  }

  /// Series with the given leading coefficients, remaining ones zero.
  static Jet series(std::initializer_list<double> coeffs) {
    Jet j;
    std::size_t k = 0;
    for (double v : coeffs) {
      if (k > N) break;
      j.c[k++] = v;
    }
    return j;
  }

  double operator[](std::size_t k) const { return c[k]; }
  double value() const { return c[0]; }

  Jet& operator+=(const Jet& o) {
    for (std::size_t k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator-(const Jet& a) {
    Jet r;
    for (std::size_t k = 0; k <= N; ++k) r.c[k] = -a.c[k];
    return r;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (std::size_t k = 0; k <= N; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
      r.c[k] = s;
    }
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet q;
    for (std::size_t k = 0; k <= N; ++k) {
      double s = a.c[k];
      for (std::size_t j = 1; j <= k; ++j) s -= b.c[j] * q.c[k - j];
      q.c[k] = s / b.c[0];
    }
    return q;
  }
};

namespace detail {

// sin and cos of a series share one recurrence.
template <std::size_t N>
void sincos(const Jet<N>& u, Jet<N>& s, Jet<N>& co) {
  s.c[0] = std::sin(u.c[0]);
  co.c[0] = std::cos(u.c[0]);
  for (std::size_t k = 1; k <= N; ++k) {
    double ss = 0.0, cc = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      ss += static_cast<double>(j) * u.c[j] * co.c[k - j];
      cc -= static_cast<double>(j) * u.c[j] * s.c[k - j];
    }
    s.c[k] = ss / static_cast<double>(k);
    co.c[k] = cc / static_cast<double>(k);
  }
}

}  // namespace detail

template <std::size_t N>
Jet<N> sin(const Jet<N>& u) {
  Jet<N> s, c;
  detail::sincos(u, s, c);
  return s;
}

template <std::size_t N>
Jet<N> cos(const Jet<N>& u) {
  Jet<N> s, c;
  detail::sincos(u, s, c);
  return c;
}

template <std::size_t N>
Jet<N> tan(const Jet<N>& u) {
  Jet<N> s, c;
  detail::sincos(u, s, c);
  return s / c;
}

template <std::size_t N>
Jet<N> sqrt(const Jet<N>& a) {
  Jet<N> s;
  s.c[0] = std::sqrt(a.c[0]);
  for (std::size_t k = 1; k <= N; ++k) {
    double acc = a.c[k];
    for (std::size_t j = 1; j < k; ++j) acc -= s.c[j] * s.c[k - j];
    s.c[k] = acc / (2.0 * s.c[0]);
  }
  return s;
}

/// Value plus gradient with respect to N independent inputs.
template <std::size_t N>
struct Dual {
  double v = 0.0;
  std::array<double, N> d{};

  constexpr Dual() = default;
  constexpr Dual(double x) : v(x) {}  // NOLINT: implicit lift is intended

  static Dual seed(double x, std::size_t i) {
    Dual r(x);
    r.d[i] = 1.0;
    return r;
  }

  double value() const { return v; }

  Dual& operator+=(const Dual& o) {
    v += o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] += o.d[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    for (std::size_t i = 0; i < N; ++i) d[i] -= o.d[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator-(const Dual& a) {
    Dual r;
    r.v = -a.v;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = -a.d[i];
    return r;
  }
  friend Dual operator+(Dual a, const Dual& b) { return a += b; }
  friend Dual operator-(Dual a, const Dual& b) { return a -= b; }
  friend Dual operator*(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v * b.v;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
    return r;
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    Dual r;
    r.v = a.v / b.v;
    const double inv = 1.0 / b.v;
    for (std::size_t i = 0; i < N; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) * inv;
    return r;
  }
};

template <std::size_t N>
Dual<N> chain(const Dual<N>& u, double f, double df) {
  Dual<N> r(f);
  for (std::size_t i = 0; i < N; ++i) r.d[i] = df * u.d[i];
  return r;
}

template <std::size_t N>
Dual<N> sin(const Dual<N>& u) {
  return chain(u, std::sin(u.v), std::cos(u.v));
}
template <std::size_t N>
Dual<N> cos(const Dual<N>& u) {
  return chain(u, std::cos(u.v), -std::sin(u.v));
}
template <std::size_t N>
Dual<N> tan(const Dual<N>& u) {
  const double t = std::tan(u.v);
  return chain(u, t, 1.0 + t * t);
}
template <std::size_t N>
Dual<N> sqrt(const Dual<N>& u) {
  const double s = std::sqrt(u.v);
  return chain(u, s, 0.5 / s);
}

/// Plain double passes through; lets templated kernels call value(x).
inline double value(double x) { return x; }
template <std::size_t N>
double value(const Jet<N>& x) {
  return x.c[0];
}
template <std::size_t N>
double value(const Dual<N>& x) {
  return x.v;
}

}  // namespace pendulon
