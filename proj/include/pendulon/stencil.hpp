#pragma once

// Fourth-order finite-difference rows on a uniform grid. Interior points use
// the centred 5-point formulas; the two points at each end use one-sided
// rows so no ghost values are needed.

#include <algorithm>
#include <array>
#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace pendulon {

/// Fornberg's recursion: weights at offsets xs for the m-th derivative at x0.
template <std::size_t K>
std::array<double, K> fd_weights(double x0, const std::array<double, K>& xs, int m) {
  double c[K][3] = {};
  double c1 = 1.0, c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < K; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::array<double, K> w{};
  for (std::size_t i = 0; i < K; ++i) w[i] = c[i][m];
  return w;
}

struct StencilRow {
  std::size_t first = 0;  ///< index of the first grid point used
  std::size_t len = 0;
  std::array<double, 6> w{};
};

/// First- and second-derivative rows for n points at spacing h.
class Stencil {
 public:
  Stencil(std::size_t n, double h) : n_(n), h_(h) {
    if (n < 6) throw DomainError("stencil: need at least 6 grid points");
    if (!(h > 0.0)) throw DomainError("stencil: spacing must be > 0");
    const std::array<double, 5> c5{-2, -1, 0, 1, 2};
    interior1_ = make<5>(0.0, c5, 1, h);
    interior2_ = make<5>(0.0, c5, 2, h);
    for (int e = 0; e < 2; ++e) {
      std::array<double, 5> x5{0, 1, 2, 3, 4};
      std::array<double, 6> x6{0, 1, 2, 3, 4, 5};
      edge1_[e] = make<5>(static_cast<double>(e), x5, 1, h);
      edge2_[e] = make<6>(static_cast<double>(e), x6, 2, h);
    }
  }

  std::size_t size() const { return n_; }
  double spacing() const { return h_; }

  StencilRow d1(std::size_t j) const { return row(j, interior1_, edge1_, true); }
  StencilRow d2(std::size_t j) const { return row(j, interior2_, edge2_, false); }

  template <class T>
  T apply(const StencilRow& r, const std::vector<T>& f) const {
    T s(0.0);
    for (std::size_t k = 0; k < r.len; ++k) s += T(r.w[k]) * f[r.first + k];
    return s;
  }

  template <class T>
  std::vector<T> first(const std::vector<T>& f) const {
    std::vector<T> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = apply(d1(j), f);
    return out;
  }
  template <class T>
  std::vector<T> second(const std::vector<T>& f) const {
    std::vector<T> out(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = apply(d2(j), f);
    return out;
  }

 private:
  struct Rel {
    std::size_t len;
    std::array<double, 6> w;
  };

  template <std::size_t K>
  static Rel make(double x0, const std::array<double, K>& xs, int m, double h) {
    const auto w = fd_weights<K>(x0, xs, m);
    Rel r{K, {}};
    const double scale = m == 1 ? 1.0 / h : 1.0 / (h * h);
    for (std::size_t k = 0; k < K; ++k) r.w[k] = w[k] * scale;
    return r;
  }

  StencilRow row(std::size_t j, const Rel& mid, const Rel (&edge)[2], bool odd) const {
    StencilRow r;
    if (j >= 2 && j + 2 < n_) {
      r.first = j - 2;
      r.len = mid.len;
      r.w = mid.w;
    } else if (j < 2) {
      r.first = 0;
      r.len = edge[j].len;
      r.w = edge[j].w;
    } else {
      // mirror of the left rows: odd derivatives change sign
      const std::size_t e = n_ - 1 - j;
      const Rel& src = edge[e];
      r.len = src.len;
      r.first = n_ - src.len;
      for (std::size_t k = 0; k < src.len; ++k)
        r.w[k] = (odd ? -1.0 : 1.0) * src.w[src.len - 1 - k];
    }
    return r;
  }

  std::size_t n_;
  double h_;
  Rel interior1_{}, interior2_{};
  Rel edge1_[2]{}, edge2_[2]{};
};

}  // namespace pendulon
