#pragma once

#include <cmath>
#include <vector>

#include "ellreg/common.hpp"
#include "ellreg/grid.hpp"
#include "ellreg/parallel.hpp"

namespace ellreg {

namespace detail {

/// Visits the 4^N midpoint subsamples of a cell (offsets at odd multiples of
/// h/8 from the center) and reports how many lie inside B_r(x0).
template <int N, class Fn>
void for_each_subsample(const Grid<N>& g,
                        const std::array<index_t, static_cast<std::size_t>(N)>& cv,
                        Fn&& fn) {
  const double h = g.h();
  const Vec<N> c = g.cell_center(cv);
  constexpr int q = 4;
  int pts = 1;
  for (int d = 0; d < N; ++d) pts *= q;
  for (int p = 0; p < pts; ++p) {
    Vec<N> x = c;
    int rem = p;
    for (int d = 0; d < N; ++d) {
      x[d] += (-0.375 + 0.25 * (rem % q)) * h;
      rem /= q;
    }
    fn(x);
  }
}

}  // namespace detail

/// Fraction of each cell lying inside the ball B_r(x0): 1 for interior cells,
/// 0 for exterior, and a 4^N-subsample estimate on boundary-crossing cells.
template <int N>
std::vector<double> ball_cell_fractions(const Grid<N>& g, const Vec<N>& x0,
                                        double r) {
  const index_t nc = g.num_cells();
  std::vector<double> frac(static_cast<std::size_t>(nc), 0.0);
  const double half_diag = 0.5 * g.h() * std::sqrt(static_cast<double>(N));
  constexpr double inv_pts = N == 2 ? 1.0 / 16.0 : 1.0 / 64.0;
  parallel_for(nc, [&](index_t b, index_t e) {
    for (index_t c = b; c < e; ++c) {
      const auto cv = g.cell_multi(c);
      const double d = (g.cell_center(cv) - x0).norm();
      if (d <= r - half_diag) {
        frac[static_cast<std::size_t>(c)] = 1.0;
      } else if (d < r + half_diag) {
        int inside = 0;
        detail::for_each_subsample(g, cv, [&](const Vec<N>& x) {
          if ((x - x0).norm() <= r) ++inside;
        });
        frac[static_cast<std::size_t>(c)] = inside * inv_pts;
      }
    }
  });
  return frac;
}

/// Per-cell fractions inside the annulus r_in < |x - x0| <= r_out.
template <int N>
std::vector<double> annulus_cell_fractions(const Grid<N>& g, const Vec<N>& x0,
                                           double r_in, double r_out) {
  std::vector<double> outer = ball_cell_fractions(g, x0, r_out);
  const std::vector<double> inner = ball_cell_fractions(g, x0, r_in);
  for (std::size_t i = 0; i < outer.size(); ++i)
    outer[i] = std::max(0.0, outer[i] - inner[i]);
  return outer;
}

}  // namespace ellreg
