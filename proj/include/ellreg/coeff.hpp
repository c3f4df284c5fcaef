#pragma once

#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "ellreg/common.hpp"
#include "ellreg/grid.hpp"
#include "ellreg/tensor.hpp"

namespace ellreg {

/// Angle assignment for the rotated anisotropic kind (2-D only).
enum class AngleField { constant, radial, tangential };

/// Uniformly elliptic symmetric coefficient field A : [-1,1]^N -> M(lambda,L).
/// An affine view (origin, scale) is folded into evaluation so that
/// eval(x) = base(origin + scale * x); rescaling composes exactly.
template <int N>
struct MatrixField {
  struct Constant {
    SymTensor<N> A;
  };
  struct Meyers {
    double lambda, L;
  };
  struct Laminate {
    double lambda, L, eps;
    int axis;  // 0-based
  };
  struct Checkerboard {
    double lambda, L, eps;
  };
  struct Rotated {
    double lambda, L;
    AngleField angles;
    double angle0;
  };
  struct GridSampled {
    Grid<N> grid;
    std::vector<SymTensor<N>> cells;  // one tensor per cell, lexicographic
    EllipticityBounds declared;
  };

  std::variant<Constant, Meyers, Laminate, Checkerboard, Rotated, GridSampled>
      spec;
  Vec<N> origin{};
  double scale = 1.0;

  SymTensor<N> eval(const Vec<N>& x) const {
    Vec<N> y = origin + x * scale;
    return std::visit([&](const auto& k) { return eval_kind(k, y); }, spec);
  }

  EllipticityBounds bounds() const {
    return std::visit(
        [](const auto& k) -> EllipticityBounds {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) {
            auto eg = eigen_range(k.A);
            return {eg[0], eg[1]};
          } else if constexpr (std::is_same_v<K, GridSampled>) {
            return k.declared;
          } else {
            return {k.lambda, k.L};
          }
        },
        spec);
  }

  bool is_grid_sampled() const {
    return std::holds_alternative<GridSampled>(spec);
  }

  /// True when A(s x) = A(x) for every s > 0, so dyadic rescaling about the
  /// origin leaves the operator invariant.
  bool is_zero_homogeneous() const {
    return std::holds_alternative<Constant>(spec) ||
           std::holds_alternative<Meyers>(spec) ||
           std::holds_alternative<Rotated>(spec);
  }

  std::string describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Constant>) {
            std::string s = "constant(";
            for (int i = 0; i < SymTensor<N>::ncomp; ++i)
              s += (i ? "," : "") + format_double(k.A.a[i]);
            return s + ")";
          } else if constexpr (std::is_same_v<K, Meyers>) {
            return "meyers(" + format_double(k.lambda) + "," +
                   format_double(k.L) + ")";
          } else if constexpr (std::is_same_v<K, Laminate>) {
            return "laminate(" + format_double(k.lambda) + "," +
                   format_double(k.L) + "," + format_double(k.eps) + ",axis" +
                   std::to_string(k.axis + 1) + ")";
          } else if constexpr (std::is_same_v<K, Checkerboard>) {
            return "checkerboard(" + format_double(k.lambda) + "," +
                   format_double(k.L) + "," + format_double(k.eps) + ")";
          } else if constexpr (std::is_same_v<K, Rotated>) {
            const char* id = k.angles == AngleField::constant ? "constant"
                             : k.angles == AngleField::radial ? "radial"
                                                              : "tangential";
            return "rotated(" + format_double(k.lambda) + "," +
                   format_double(k.L) + "," + id + "," +
                   format_double(k.angle0) + ")";
          } else {
            return "grid-sampled(m=" + std::to_string(k.grid.m) + ")";
          }
        },
        spec);
  }

 private:
  static SymTensor<N> eval_kind(const Constant& k, const Vec<N>&) {
    return k.A;
  }

  static SymTensor<N> eval_kind(const Meyers& k, const Vec<N>& x) {
    const double p = x.dot(x);
    SymTensor<N> A = SymTensor<N>::identity(k.lambda);
    if (p == 0.0) return A;  // lambda*Id convention on the null set {0}
    const double c = (k.L - k.lambda) / p;
    for (int i = 0; i < N; ++i)
      for (int j = i; j < N; ++j) A(i, j) += c * x[i] * x[j];
    return A;
  }

  static SymTensor<N> eval_kind(const Laminate& k, const Vec<N>& x) {
    const double s = x[k.axis] / k.eps;
    const double frac = s - std::floor(s);
    const double a = (frac < 0.5) ? k.lambda : k.L;
    return SymTensor<N>::identity(a);
  }

  static SymTensor<N> eval_kind(const Checkerboard& k, const Vec<N>& x) {
    long long parity = 0;
    for (int d = 0; d < N; ++d)
      parity += static_cast<long long>(std::floor(x[d] / k.eps));
    const double a = ((parity % 2 + 2) % 2 == 0) ? k.lambda : k.L;
    return SymTensor<N>::identity(a);
  }

  static SymTensor<N> eval_kind(const Rotated& k, const Vec<N>& x) {
    static_assert(N >= 2);
    double theta = k.angle0;
    if (k.angles == AngleField::radial)
      theta = std::atan2(x[1], x[0]);
    else if (k.angles == AngleField::tangential)
      theta = std::atan2(x[1], x[0]) + 1.57079632679489661923;
    const double c = std::cos(theta), s = std::sin(theta);
    // R diag(L, lambda) R^T: first principal axis (cos, sin) carries L.
    SymTensor<N> A = SymTensor<N>::identity(k.lambda);
    const double d = k.L - k.lambda;
    A(0, 0) += d * c * c;
    A(1, 1) += d * s * s;
    A(0, 1) += d * c * s;
    return A;
  }

  static SymTensor<N> eval_kind(const GridSampled& k, const Vec<N>& x) {
    std::array<index_t, N> cv{};
    const double h = k.grid.h();
    for (int d = 0; d < N; ++d) {
      double s = (x[d] + 1.0) / h;
      index_t c = static_cast<index_t>(std::floor(s));
      cv[d] = std::min(std::max(c, index_t{0}), k.grid.m - 1);
    }
    return k.cells[static_cast<std::size_t>(k.grid.cell_index(cv))];
  }
};

// ---- constructors -------------------------------------------------------

template <int N>
MatrixField<N> constant_field(const SymTensor<N>& A) {
  auto eg = eigen_range(A);
  if (eg[0] <= 0.0)
    throw config_error("constant field: tensor is not positive definite");
  MatrixField<N> f;
  f.spec = typename MatrixField<N>::Constant{A};
  return f;
}

template <int N>
MatrixField<N> identity_field(double s = 1.0) {
  return constant_field(SymTensor<N>::identity(s));
}

inline void check_bounds(double lambda, double L) {
  if (!(lambda > 0.0) || !(L >= lambda))
    throw config_error("ellipticity bounds: need 0 < lambda <= L, got lambda=" +
                       format_double(lambda) + " L=" + format_double(L));
}

template <int N>
MatrixField<N> meyers_field(double lambda, double L) {
  check_bounds(lambda, L);
  MatrixField<N> f;
  f.spec = typename MatrixField<N>::Meyers{lambda, L};
  return f;
}

template <int N>
MatrixField<N> laminate_field(double lambda, double L, double eps, int axis) {
  check_bounds(lambda, L);
  if (!(eps > 0.0)) throw config_error("laminate: period eps must be > 0");
  if (axis < 0 || axis >= N)
    throw config_error("laminate: axis out of range for dimension " +
                       std::to_string(N));
  MatrixField<N> f;
  f.spec = typename MatrixField<N>::Laminate{lambda, L, eps, axis};
  return f;
}

template <int N>
MatrixField<N> checkerboard_field(double lambda, double L, double eps) {
  static_assert(N == 2, "checkerboard field is 2-D");
  check_bounds(lambda, L);
  if (!(eps > 0.0)) throw config_error("checkerboard: eps must be > 0");
  MatrixField<N> f;
  f.spec = typename MatrixField<N>::Checkerboard{lambda, L, eps};
  return f;
}

template <int N>
MatrixField<N> rotated_field(double lambda, double L, AngleField angles,
                             double angle0 = 0.0) {
  static_assert(N == 2, "rotated field is 2-D");
  check_bounds(lambda, L);
  MatrixField<N> f;
  f.spec = typename MatrixField<N>::Rotated{lambda, L, angles, angle0};
  return f;
}

template <int N>
MatrixField<N> grid_sampled_field(const Grid<N>& g,
                                  std::vector<SymTensor<N>> cells,
                                  EllipticityBounds declared) {
  if (static_cast<index_t>(cells.size()) != g.num_cells())
    throw config_error("grid-sampled field: cell count " +
                       std::to_string(cells.size()) + " does not match grid (" +
                       std::to_string(g.num_cells()) + " cells)");
  MatrixField<N> f;
  f.spec = typename MatrixField<N>::GridSampled{g, std::move(cells), declared};
  return f;
}

// ---- operations ---------------------------------------------------------

/// Affine pullback A'(x) = A(x0 + r x).  Composes exactly: the affine data is
/// folded algebraically, never re-sampled.
template <int N>
MatrixField<N> rescale_field(const MatrixField<N>& f, const Vec<N>& x0,
                             double r) {
  if (!(r > 0.0)) throw config_error("rescale_field: scale must be positive");
  MatrixField<N> g = f;
  g.origin = f.origin + x0 * f.scale;
  g.scale = f.scale * r;
  return g;
}

template <int N>
struct EllipticityReport {
  bool ok = false;
  double min_eig = 0, max_eig = 0;
  Vec<N> argmin{}, argmax{};
  std::string note;
};

namespace detail {
/// Kronecker (generalized golden ratio) low-discrepancy sequence in [0,1)^N.
template <int N>
Vec<N> kronecker_point(index_t k) {
  double g = 1.0;
  for (int it = 0; it < 40; ++it) g = std::pow(1.0 + g, 1.0 / (N + 1));
  Vec<N> x;
  double a = 1.0;
  for (int d = 0; d < N; ++d) {
    a /= g;
    const double v = 0.5 + a * static_cast<double>(k + 1);
    x[d] = v - std::floor(v);
  }
  return x;
}
}  // namespace detail

/// Samples eigenvalue ranges at quasi-random points (plus every cell for
/// grid-sampled kinds) and compares with the declared ellipticity window.
/// tol <= 0 selects the default 1e-7 * max(1, L): the closed-form 3x3
/// eigensolver is only sqrt(machine-eps)-accurate where the spectrum has a
/// multiple eigenvalue, so a tighter default would reject exact fields.
template <int N>
EllipticityReport<N> verify_ellipticity(const MatrixField<N>& f,
                                        index_t sample_count,
                                        double tol = -1.0) {
  if (sample_count < 1)
    throw config_error("verify_ellipticity: sample count must be >= 1");
  const EllipticityBounds b = f.bounds();
  if (tol <= 0.0) tol = 1e-7 * std::max(1.0, std::abs(b.L));

  EllipticityReport<N> rep;
  rep.min_eig = std::numeric_limits<double>::infinity();
  rep.max_eig = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec<N>& x) {
    const auto eg = eigen_range(f.eval(x));
    if (eg[0] < rep.min_eig) {
      rep.min_eig = eg[0];
      rep.argmin = x;
    }
    if (eg[1] > rep.max_eig) {
      rep.max_eig = eg[1];
      rep.argmax = x;
    }
  };
  for (index_t k = 0; k < sample_count; ++k) {
    Vec<N> u = detail::kronecker_point<N>(k);
    Vec<N> x;
    for (int d = 0; d < N; ++d) x[d] = 2.0 * u[d] - 1.0;
    consider(x);
  }
  if (const auto* gs =
          std::get_if<typename MatrixField<N>::GridSampled>(&f.spec)) {
    const index_t nc = gs->grid.num_cells();
    for (index_t c = 0; c < nc; ++c)
      consider(gs->grid.cell_center(gs->grid.cell_multi(c)));
  }
  rep.ok = rep.min_eig >= b.lambda - tol && rep.max_eig <= b.L + tol;
  if (!rep.ok) {
    rep.note = "eigenvalue range [" + format_double(rep.min_eig) + "," +
               format_double(rep.max_eig) + "] escapes [" +
               format_double(b.lambda) + "," + format_double(b.L) +
               "]; extremal points recorded";
  }
  return rep;
}

/// Entrywise convolution with the bump c (1-|y/eps|^2)^3, normalized to unit
/// mass on the quadrature stencil, sampled per cell of `target`.  When eps is
/// below one cell width the documented fallback returns per-cell averages.
template <int N>
MatrixField<N> mollify_field(const MatrixField<N>& f, double eps,
                             const Grid<N>& target = Grid<N>(64)) {
  if (!(eps > 0.0)) throw config_error("mollify_field: eps must be > 0");
  const double h = target.h();
  std::vector<SymTensor<N>> cells(
      static_cast<std::size_t>(target.num_cells()));

  const index_t nc = target.num_cells();
  if (eps < h) {
    // Cell-average fallback: mean over 2^N midpoint subsamples.
    for (index_t c = 0; c < nc; ++c) {
      const Vec<N> xc = target.cell_center(target.cell_multi(c));
      SymTensor<N> acc;
      for (int s = 0; s < (1 << N); ++s) {
        Vec<N> x = xc;
        for (int d = 0; d < N; ++d)
          x[d] += ((s & (1 << d)) ? 0.25 : -0.25) * h;
        acc = acc + f.eval(x);
      }
      cells[static_cast<std::size_t>(c)] = acc * (1.0 / (1 << N));
    }
  } else {
    constexpr int q = 8;  // quadrature points per dimension across [-eps, eps]
    for (index_t c = 0; c < nc; ++c) {
      const Vec<N> xc = target.cell_center(target.cell_multi(c));
      SymTensor<N> acc;
      double wsum = 0.0;
      int pts = 1;
      for (int d = 0; d < N; ++d) pts *= q;
      for (int p = 0; p < pts; ++p) {
        Vec<N> y;
        int rem = p;
        double r2 = 0.0;
        for (int d = 0; d < N; ++d) {
          const int i = rem % q;
          rem /= q;
          y[d] = eps * (-1.0 + (2.0 * i + 1.0) / q);
          r2 += y[d] * y[d];
        }
        const double t = 1.0 - r2 / (eps * eps);
        if (t <= 0.0) continue;
        const double w = t * t * t;
        acc = acc + f.eval(xc - y) * w;
        wsum += w;
      }
      cells[static_cast<std::size_t>(c)] = acc * (1.0 / wsum);
    }
  }
  return grid_sampled_field(target, std::move(cells), f.bounds());
}

/// Residual of the radial/spherical splitting of the quadratic form:
///   (A xi . xi) - [ (A xi . nu)^2 / L + lambda |xi_S|^2 ],
/// with nu = x/|x| and xi_S the tangential part of xi.  Nonnegative for every
/// field in M(lambda, L).
template <int N>
double form_decomposition_check(const MatrixField<N>& f, const Vec<N>& x,
                                const Vec<N>& xi) {
  const double nx = x.norm();
  if (nx == 0.0)
    throw std::invalid_argument(
        "form_decomposition_check: x = 0 has no radial direction");
  const Vec<N> nu = x * (1.0 / nx);
  const EllipticityBounds b = f.bounds();
  const SymTensor<N> A = f.eval(x);
  const Vec<N> Axi = A.apply(xi);
  const double flux = Axi.dot(nu);
  const Vec<N> xi_s = xi - nu * xi.dot(nu);
  return Axi.dot(xi) - (flux * flux / b.L + b.lambda * xi_s.dot(xi_s));
}

}  // namespace ellreg
