#pragma once

#include <algorithm>
#include <cmath>

#include "ellreg/common.hpp"

namespace ellreg {

/// Symmetric N x N matrix stored as the upper triangle:
///   N = 2: [a11, a22, a12]
///   N = 3: [a11, a22, a33, a12, a13, a23]
template <int N>
struct SymTensor {
  static constexpr int ncomp = N * (N + 1) / 2;
  std::array<double, ncomp> a{};

  static constexpr int idx(int i, int j) {
    if (i == j) return i;
    const int lo = std::min(i, j), hi = std::max(i, j);
    if constexpr (N == 2) {
      (void)lo;
      (void)hi;
      return 2;
    } else {
      // (0,1)->3, (0,2)->4, (1,2)->5
      return 2 + lo + hi;
    }
  }

  double operator()(int i, int j) const { return a[idx(i, j)]; }
  double& operator()(int i, int j) { return a[idx(i, j)]; }

  static SymTensor identity(double s = 1.0) {
    SymTensor t;
    for (int i = 0; i < N; ++i) t(i, i) = s;
    return t;
  }

  Vec<N> apply(const Vec<N>& x) const {
    Vec<N> y;
    for (int i = 0; i < N; ++i) {
      double s = 0;
      for (int j = 0; j < N; ++j) s += (*this)(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }

  /// Quadratic form x . A x.
  double form(const Vec<N>& x) const { return apply(x).dot(x); }

  /// Bilinear form x . A y.
  double form(const Vec<N>& x, const Vec<N>& y) const {
    return apply(y).dot(x);
  }

  SymTensor operator+(const SymTensor& o) const {
    SymTensor r;
    for (int i = 0; i < ncomp; ++i) r.a[i] = a[i] + o.a[i];
    return r;
  }
  SymTensor operator*(double s) const {
    SymTensor r;
    for (int i = 0; i < ncomp; ++i) r.a[i] = a[i] * s;
    return r;
  }
};

/// [min, max] eigenvalue of a symmetric tensor (closed forms).
template <int N>
std::array<double, 2> eigen_range(const SymTensor<N>& t) {
  if constexpr (N == 2) {
    const double tr = t(0, 0) + t(1, 1);
    const double d = t(0, 0) - t(1, 1);
    const double disc = std::sqrt(d * d / 4 + t(0, 1) * t(0, 1));
    return {tr / 2 - disc, tr / 2 + disc};
  } else {
    const double p1 =
        t(0, 1) * t(0, 1) + t(0, 2) * t(0, 2) + t(1, 2) * t(1, 2);
    if (p1 == 0.0) {
      const double lo = std::min({t(0, 0), t(1, 1), t(2, 2)});
      const double hi = std::max({t(0, 0), t(1, 1), t(2, 2)});
      return {lo, hi};
    }
    const double q = (t(0, 0) + t(1, 1) + t(2, 2)) / 3;
    const double p2 = (t(0, 0) - q) * (t(0, 0) - q) +
                      (t(1, 1) - q) * (t(1, 1) - q) +
                      (t(2, 2) - q) * (t(2, 2) - q) + 2 * p1;
    const double p = std::sqrt(p2 / 6);
    // B = (A - q I) / p, r = det(B) / 2 in [-1, 1] up to rounding.
    const double b00 = (t(0, 0) - q) / p, b11 = (t(1, 1) - q) / p,
                 b22 = (t(2, 2) - q) / p;
    const double b01 = t(0, 1) / p, b02 = t(0, 2) / p, b12 = t(1, 2) / p;
    double r = (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                b02 * (b01 * b12 - b11 * b02)) /
               2;
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3;
    const double hi = q + 2 * p * std::cos(phi);
    const double lo = q + 2 * p * std::cos(phi + 2 * 3.14159265358979323846 / 3);
    return {lo, hi};
  }
}

/// Uniform ellipticity window of a coefficient field.
struct EllipticityBounds {
  double lambda = 0;
  double L = 0;
};

}  // namespace ellreg
