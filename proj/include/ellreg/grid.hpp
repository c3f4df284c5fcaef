#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ellreg/common.hpp"

namespace ellreg {

/// Uniform Cartesian grid on the cube [-1, 1]^N with m cells per side.
template <int N>
struct Grid {
  index_t m = 0;

  Grid() = default;
  explicit Grid(index_t cells) : m(cells) {
    if (m < 2) throw config_error("grid: need at least 2 cells per side");
  }

  double h() const { return 2.0 / static_cast<double>(m); }
  index_t nodes_per_side() const { return m + 1; }

  index_t num_nodes() const {
    index_t n = 1;
    for (int d = 0; d < N; ++d) n *= (m + 1);
    return n;
  }
  index_t num_cells() const {
    index_t n = 1;
    for (int d = 0; d < N; ++d) n *= m;
    return n;
  }

  index_t node_index(const std::array<index_t, N>& iv) const {
    index_t idx = 0;
    for (int d = 0; d < N; ++d) idx = idx * (m + 1) + iv[d];
    return idx;
  }
  std::array<index_t, N> node_multi(index_t idx) const {
    std::array<index_t, N> iv{};
    for (int d = N - 1; d >= 0; --d) {
      iv[d] = idx % (m + 1);
      idx /= (m + 1);
    }
    return iv;
  }
  Vec<N> node_position(const std::array<index_t, N>& iv) const {
    Vec<N> x;
    for (int d = 0; d < N; ++d) x[d] = -1.0 + h() * static_cast<double>(iv[d]);
    return x;
  }
  Vec<N> node_position(index_t idx) const { return node_position(node_multi(idx)); }

  bool is_boundary(const std::array<index_t, N>& iv) const {
    for (int d = 0; d < N; ++d)
      if (iv[d] == 0 || iv[d] == m) return true;
    return false;
  }

  index_t cell_index(const std::array<index_t, N>& cv) const {
    index_t idx = 0;
    for (int d = 0; d < N; ++d) idx = idx * m + cv[d];
    return idx;
  }
  std::array<index_t, N> cell_multi(index_t idx) const {
    std::array<index_t, N> cv{};
    for (int d = N - 1; d >= 0; --d) {
      cv[d] = idx % m;
      idx /= m;
    }
    return cv;
  }
  Vec<N> cell_center(const std::array<index_t, N>& cv) const {
    Vec<N> x;
    for (int d = 0; d < N; ++d)
      x[d] = -1.0 + h() * (static_cast<double>(cv[d]) + 0.5);
    return x;
  }

  /// Node indices of a cell's 2^N corners, lexicographic in the offset bits
  /// (bit d of the corner id selects the +1 offset in dimension d).
  std::array<index_t, (1 << N)> cell_nodes(const std::array<index_t, N>& cv) const {
    std::array<index_t, (1 << N)> out{};
    for (int c = 0; c < (1 << N); ++c) {
      std::array<index_t, N> iv = cv;
      for (int d = 0; d < N; ++d)
        if (c & (1 << d)) ++iv[d];
      out[c] = node_index(iv);
    }
    return out;
  }
};

/// Nodal scalar data on a Grid.  `exact_gradient`, when set, exposes the
/// analytic gradient of the function the nodal data samples; quadratures use
/// it to evaluate energies of closed-form solutions away from grid artifacts.
template <int N>
struct ScalarField {
  Grid<N> grid;
  std::vector<double> values;
  std::string tag;
  std::function<Vec<N>(const Vec<N>&)> exact_gradient;

  ScalarField() = default;
  ScalarField(const Grid<N>& g, std::string t = "")
      : grid(g), values(static_cast<std::size_t>(g.num_nodes()), 0.0),
        tag(std::move(t)) {}

  double& operator[](index_t i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](index_t i) const {
    return values[static_cast<std::size_t>(i)];
  }

  /// Multilinear interpolation at x (x clamped to the closed cube).
  double value(const Vec<N>& x) const {
    const double h = grid.h();
    std::array<index_t, N> cv{};
    Vec<N> t;
    for (int d = 0; d < N; ++d) {
      double s = (x[d] + 1.0) / h;
      s = std::min(std::max(s, 0.0), static_cast<double>(grid.m));
      index_t c = static_cast<index_t>(std::floor(s));
      if (c >= grid.m) c = grid.m - 1;
      cv[d] = c;
      t[d] = s - static_cast<double>(c);
    }
    const auto nodes = grid.cell_nodes(cv);
    double acc = 0.0;
    for (int c = 0; c < (1 << N); ++c) {
      double w = 1.0;
      for (int d = 0; d < N; ++d) w *= (c & (1 << d)) ? t[d] : 1.0 - t[d];
      acc += w * values[static_cast<std::size_t>(nodes[c])];
    }
    return acc;
  }

  /// Gradient of the multilinear interpolant at the center of a cell.
  Vec<N> cell_gradient(const std::array<index_t, N>& cv) const {
    const auto nodes = grid.cell_nodes(cv);
    Vec<N> g;
    const double scale = 1.0 / (grid.h() * (1 << (N - 1)));
    for (int d = 0; d < N; ++d) {
      double s = 0.0;
      for (int c = 0; c < (1 << N); ++c)
        s += (c & (1 << d)) ? values[static_cast<std::size_t>(nodes[c])]
                            : -values[static_cast<std::size_t>(nodes[c])];
      g[d] = s * scale;
    }
    return g;
  }
};

/// Fills nodal values from a callable.
template <int N, class Fn>
ScalarField<N> sample_on_grid(const Grid<N>& g, Fn&& fn, std::string tag = "") {
  ScalarField<N> f(g, std::move(tag));
  const index_t n = g.num_nodes();
  for (index_t i = 0; i < n; ++i) f[i] = fn(g.node_position(i));
  return f;
}

}  // namespace ellreg
