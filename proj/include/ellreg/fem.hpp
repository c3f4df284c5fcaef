#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ellreg/coeff.hpp"
#include "ellreg/common.hpp"
#include "ellreg/exact.hpp"
#include "ellreg/grid.hpp"
#include "ellreg/parallel.hpp"
#include "ellreg/quadrature.hpp"
#include "ellreg/sparse.hpp"
#include "ellreg/tensor.hpp"

namespace ellreg {

/// Dirichlet trace prescribed on the cube boundary.
template <int N>
struct BoundaryData {
  std::function<double(const Vec<N>&)> g;
  std::string kind = "analytic-expression";

  static BoundaryData constant(double c) {
    return {[c](const Vec<N>&) { return c; }, "constant"};
  }
  static BoundaryData expression(std::function<double(const Vec<N>&)> fn) {
    return {std::move(fn), "analytic-expression"};
  }
  static BoundaryData from_exact(std::function<double(const Vec<N>&)> fn) {
    return {std::move(fn), "from-exact-solution"};
  }
};

struct SolveReport {
  index_t iterations = 0;
  double residual = 0.0;
  double assembly_ms = 0.0;
  double solve_ms = 0.0;
  // Worst excursion of the solution beyond [min g, max g]; 0 when the
  // discrete maximum principle holds.  Diagnostic only for point loads.
  double max_principle_delta = 0.0;
};

namespace detail {

constexpr int sym_index(int i, int j, int nloc) {
  return i * nloc - i * (i - 1) / 2 + (j - i);  // requires i <= j
}

/// Reference Q1 gradients at the 2^N tensor-product Gauss points
/// (+-1/sqrt(3) per axis).  grads[p][l][d] = d phi_l / d t_d at point p.
template <int N>
struct RefGradients {
  static constexpr int nloc = 1 << N;
  double g[nloc][nloc][N];
  Vec<N> points[nloc];

  RefGradients() {
    const double gp = 1.0 / std::sqrt(3.0);
    for (int p = 0; p < nloc; ++p) {
      Vec<N> xi;
      for (int d = 0; d < N; ++d) xi[d] = (p & (1 << d)) ? gp : -gp;
      points[p] = xi;
      for (int l = 0; l < nloc; ++l) {
        for (int d = 0; d < N; ++d) {
          double v = 1.0;
          for (int e = 0; e < N; ++e) {
            const double s = (l & (1 << e)) ? 1.0 : -1.0;
            v *= (e == d) ? 0.5 * s : 0.5 * (1.0 + s * xi[e]);
          }
          g[p][l][d] = v;
        }
      }
    }
  }
};

template <int N>
const RefGradients<N>& ref_gradients() {
  static const RefGradients<N> table;
  return table;
}

template <int N>
std::string cell_name(const Grid<N>& g, index_t c) {
  const auto cv = g.cell_multi(c);
  std::string s = "(";
  for (int d = 0; d < N; ++d)
    s += (d ? "," : "") + std::to_string(cv[d]);
  return s + ")";
}

}  // namespace detail

/// Assembles the Q1 stiffness matrix of the bilinear form
/// integral A grad(phi_i) . grad(phi_j) over the full node set (no boundary
/// elimination), using 2-point Gauss quadrature per axis.  The result is
/// bitwise symmetric and independent of the worker count.
template <int N>
SparseMatrix assemble_system(const MatrixField<N>& field, const Grid<N>& g) {
  constexpr int nloc = 1 << N;
  constexpr int nsym = nloc * (nloc + 1) / 2;
  const auto& ref = detail::ref_gradients<N>();
  const double h = g.h();
  const double jac = std::pow(h / 2.0, N);
  const double grad_scale = 2.0 / h;

  const index_t nc = g.num_cells();
  std::vector<std::array<double, nsym>> local(
      static_cast<std::size_t>(nc));
  std::atomic<index_t> bad_cell{-1};

  parallel_for(nc, [&](index_t cb, index_t ce) {
    for (index_t c = cb; c < ce; ++c) {
      const auto cv = g.cell_multi(c);
      const Vec<N> center = g.cell_center(cv);
      auto& K = local[static_cast<std::size_t>(c)];
      K.fill(0.0);
      for (int p = 0; p < nloc; ++p) {
        Vec<N> x = center + ref.points[p] * (h / 2.0);
        const SymTensor<N> A = field.eval(x);
        if (eigen_range(A)[0] <= 0.0) {
          bad_cell.store(c);
          return;
        }
        // w_p = 1 for 2-point Gauss on [-1,1]^N reference cell.
        for (int l = 0; l < nloc; ++l) {
          Vec<N> gl;
          for (int d = 0; d < N; ++d) gl[d] = ref.g[p][l][d] * grad_scale;
          const Vec<N> Agl = A.apply(gl);
          for (int l2 = l; l2 < nloc; ++l2) {
            double s = 0.0;
            for (int d = 0; d < N; ++d)
              s += Agl[d] * ref.g[p][l2][d] * grad_scale;
            K[detail::sym_index(l, l2, nloc)] += jac * s;
          }
        }
      }
    }
  });
  if (bad_cell.load() >= 0)
    throw numeric_error("assembly: non-elliptic tensor sampled at cell " +
                        detail::cell_name(g, bad_cell.load()));

  // Row pattern: for node i, neighbors iv + delta, delta in {-1,0,1}^N,
  // in lexicographic delta order == ascending column index.
  const index_t n = g.num_nodes();
  SparseMatrix K;
  K.n = n;
  K.rowptr.assign(static_cast<std::size_t>(n) + 1, 0);

  std::vector<int> row_count(static_cast<std::size_t>(n), 0);
  parallel_for(n, [&](index_t b, index_t e) {
    for (index_t i = b; i < e; ++i) {
      const auto iv = g.node_multi(i);
      int cnt = 1;
      for (int d = 0; d < N; ++d) {
        int span = 1;
        if (iv[d] > 0) ++span;
        if (iv[d] < g.m) ++span;
        cnt *= span;
      }
      row_count[static_cast<std::size_t>(i)] = cnt;
    }
  });
  for (index_t i = 0; i < n; ++i)
    K.rowptr[static_cast<std::size_t>(i) + 1] =
        K.rowptr[static_cast<std::size_t>(i)] +
        row_count[static_cast<std::size_t>(i)];
  const index_t nnz = K.rowptr.back();
  K.col.assign(static_cast<std::size_t>(nnz), 0);
  K.val.assign(static_cast<std::size_t>(nnz), 0.0);

  constexpr int ndelta = []() {
    int v = 1;
    for (int d = 0; d < N; ++d) v *= 3;
    return v;
  }();

  parallel_for(n, [&](index_t b, index_t e) {
    for (index_t i = b; i < e; ++i) {
      const auto iv = g.node_multi(i);
      index_t pos = K.rowptr[static_cast<std::size_t>(i)];
      for (int dd = 0; dd < ndelta; ++dd) {
        std::array<index_t, N> jv;
        int rem = dd;
        bool ok = true;
        for (int d = N - 1; d >= 0; --d) {
          const int delta = rem % 3 - 1;
          rem /= 3;
          jv[d] = iv[d] + delta;
          if (jv[d] < 0 || jv[d] > g.m) ok = false;
        }
        if (!ok) continue;
        // Sum the local contributions over cells containing both nodes,
        // visited in a fixed order (descending cell index).
        double acc = 0.0;
        for (int o = 0; o < nloc; ++o) {
          std::array<index_t, N> cv;
          bool valid = true;
          int li = 0, lj = 0;
          for (int d = 0; d < N; ++d) {
            const index_t off = (o & (1 << d)) ? 1 : 0;
            cv[d] = iv[d] - off;
            if (cv[d] < 0 || cv[d] > g.m - 1) {
              valid = false;
              break;
            }
            const index_t ljd = jv[d] - cv[d];
            if (ljd < 0 || ljd > 1) {
              valid = false;
              break;
            }
            if (off) li |= 1 << d;
            if (ljd) lj |= 1 << d;
          }
          if (!valid) continue;
          const auto& Kc = local[static_cast<std::size_t>(g.cell_index(cv))];
          acc += (li <= lj) ? Kc[detail::sym_index(li, lj, nloc)]
                            : Kc[detail::sym_index(lj, li, nloc)];
        }
        K.col[static_cast<std::size_t>(pos)] =
            static_cast<std::int32_t>(g.node_index(jv));
        K.val[static_cast<std::size_t>(pos)] = acc;
        ++pos;
      }
    }
  });
  return K;
}

template <int N>
struct DirichletOptions {
  std::vector<index_t> extra_zero_nodes;  // interior nodes pinned to zero
  std::vector<double> load;               // nodal load functional, default 0
  index_t max_iter = 0;                   // 0 -> 50 sqrt(nodes)
};

template <int N>
struct SolveResult {
  ScalarField<N> u;
  SolveReport report;
};

/// Solves div(A grad u) = -load with Dirichlet data g on the cube boundary
/// (plus optional pinned interior nodes), by symmetric elimination and
/// Jacobi-preconditioned CG with relative residual tolerance `tol`.
template <int N>
SolveResult<N> solve_dirichlet(const MatrixField<N>& field, const Grid<N>& g,
                               const BoundaryData<N>& bdata, double tol = 1e-10,
                               DirichletOptions<N> opts = {}) {
  if (!(tol > 0.0)) throw config_error("solve_dirichlet: tol must be > 0");
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  SparseMatrix K = assemble_system(field, g);
  const auto t1 = clock::now();

  const index_t n = g.num_nodes();
  std::vector<char> constrained(static_cast<std::size_t>(n), 0);
  std::vector<double> gval(static_cast<std::size_t>(n), 0.0);
  double gmin = std::numeric_limits<double>::infinity(), gmax = -gmin;
  for (index_t i = 0; i < n; ++i) {
    const auto iv = g.node_multi(i);
    if (g.is_boundary(iv)) {
      constrained[static_cast<std::size_t>(i)] = 1;
      const double v = bdata.g(g.node_position(iv));
      gval[static_cast<std::size_t>(i)] = v;
      gmin = std::min(gmin, v);
      gmax = std::max(gmax, v);
    }
  }
  for (index_t i : opts.extra_zero_nodes) {
    if (i < 0 || i >= n)
      throw config_error("solve_dirichlet: pinned node index out of range");
    constrained[static_cast<std::size_t>(i)] = 1;
    gval[static_cast<std::size_t>(i)] = 0.0;
    gmin = std::min(gmin, 0.0);
    gmax = std::max(gmax, 0.0);
  }

  const bool has_load = !opts.load.empty();
  if (has_load && static_cast<index_t>(opts.load.size()) != n)
    throw config_error("solve_dirichlet: load vector size mismatch");
  std::vector<double> b =
      has_load ? opts.load : std::vector<double>(static_cast<std::size_t>(n), 0.0);

  // Symmetric elimination: constrained rows keep only their diagonal;
  // couplings into constrained columns move to the right-hand side.
  parallel_for(n, [&](index_t lo, index_t hi) {
    for (index_t i = lo; i < hi; ++i) {
      const auto u = static_cast<std::size_t>(i);
      if (constrained[u]) {
        for (index_t p = K.rowptr[u]; p < K.rowptr[u + 1]; ++p)
          if (K.col[static_cast<std::size_t>(p)] != i)
            K.val[static_cast<std::size_t>(p)] = 0.0;
        b[u] = K.diagonal(i) * gval[u];
      } else {
        for (index_t p = K.rowptr[u]; p < K.rowptr[u + 1]; ++p) {
          const auto j =
              static_cast<std::size_t>(K.col[static_cast<std::size_t>(p)]);
          if (constrained[j]) {
            b[u] -= K.val[static_cast<std::size_t>(p)] * gval[j];
            K.val[static_cast<std::size_t>(p)] = 0.0;
          }
        }
      }
    }
  });

  std::vector<double> x = gval;  // satisfies the constraints exactly
  const index_t cap = opts.max_iter > 0
                          ? opts.max_iter
                          : 50 * static_cast<index_t>(
                                     std::ceil(std::sqrt(double(n))));
  CgResult cg = pcg_solve(K, b, x, tol, cap);
  const auto t2 = clock::now();

  SolveResult<N> out;
  out.u = ScalarField<N>(g, "solution");
  out.u.values = std::move(x);
  out.report.iterations = cg.iterations;
  out.report.residual = cg.rel_residual;
  out.report.assembly_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  out.report.solve_ms =
      std::chrono::duration<double, std::milli>(t2 - t1).count();
  if (!has_load) {
    double umin = gmin, umax = gmax;
    for (double v : out.u.values) {
      umin = std::min(umin, v);
      umax = std::max(umax, v);
    }
    out.report.max_principle_delta =
        std::max(0.0, std::max(gmin - umin, umax - gmax));
  }
  return out;
}

/// L2 distance by cell-midpoint quadrature (the Q1 value at a cell center is
/// the mean of its corner values).
template <int N>
double l2_error(const ScalarField<N>& u, const ScalarField<N>& v) {
  if (u.grid.m != v.grid.m)
    throw std::invalid_argument("l2_error: grids do not match");
  const Grid<N>& g = u.grid;
  const double cell_vol = std::pow(g.h(), N);
  const double s = chunked_sum(g.num_cells(), [&](index_t c) {
    const auto nodes = g.cell_nodes(g.cell_multi(c));
    double du = 0.0;
    for (index_t nd : nodes) du += u[nd] - v[nd];
    du /= nodes.size();
    return cell_vol * du * du;
  });
  return std::sqrt(s);
}

template <int N>
double l2_error(const ScalarField<N>& u,
                const std::function<double(const Vec<N>&)>& v) {
  const Grid<N>& g = u.grid;
  const double cell_vol = std::pow(g.h(), N);
  const double s = chunked_sum(g.num_cells(), [&](index_t c) {
    const auto cv = g.cell_multi(c);
    const auto nodes = g.cell_nodes(cv);
    double du = 0.0;
    for (index_t nd : nodes) du += u[nd];
    du = du / nodes.size() - v(g.cell_center(cv));
    return cell_vol * du * du;
  });
  return std::sqrt(s);
}

/// Q1 gradient at every cell center, in cell-lexicographic order.
template <int N>
std::vector<Vec<N>> gradient_field(const ScalarField<N>& u) {
  const Grid<N>& g = u.grid;
  const index_t nc = g.num_cells();
  std::vector<Vec<N>> out(static_cast<std::size_t>(nc));
  parallel_for(nc, [&](index_t b, index_t e) {
    for (index_t c = b; c < e; ++c)
      out[static_cast<std::size_t>(c)] = u.cell_gradient(g.cell_multi(c));
  });
  return out;
}

struct MoserRung {
  int k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct MoserReport {
  std::array<MoserRung, 2> rungs;
};

/// Normalized annulus L^k norms along the exponent ladder k_i = 2*3^i
/// (i = 1, 2) against the normalized L^2 norm on the doubled annulus:
///   lhs_i = ( r^{-3} int_{B_{3r/2} \ B_r} u^{k_i} )^{2/k_i},
///   rhs   =   r^{-3} int_{B_{2r} \ B_r} u^2.
/// A solver diagnostic: only finiteness and refinement stability of the
/// ratios are asserted by callers.
inline MoserReport moser_ladder_check(const ScalarField<3>& u, double r) {
  if (r >= 0.5)
    throw std::invalid_argument(
        "moser_ladder_check: need r < 1/2 so B_2r stays inside the domain");
  const Grid<3>& g = u.grid;
  const Vec<3> origin{};
  const auto w_narrow = annulus_cell_fractions(g, origin, r, 1.5 * r);
  const auto w_wide = annulus_cell_fractions(g, origin, r, 2.0 * r);
  const double cell_vol = std::pow(g.h(), 3);
  const double inv_r3 = 1.0 / (r * r * r);

  auto cell_mean = [&](index_t c) {
    const auto nodes = g.cell_nodes(g.cell_multi(c));
    double s = 0.0;
    for (index_t nd : nodes) s += u[nd];
    return s / nodes.size();
  };

  MoserReport rep;
  const double rhs =
      inv_r3 * chunked_sum(g.num_cells(), [&](index_t c) {
        const double w = w_wide[static_cast<std::size_t>(c)];
        if (w == 0.0) return 0.0;
        const double m = cell_mean(c);
        return cell_vol * w * m * m;
      });
  for (int i = 1; i <= 2; ++i) {
    const int k = 2 * static_cast<int>(std::pow(3, i));
    const double integral = chunked_sum(g.num_cells(), [&](index_t c) {
      const double w = w_narrow[static_cast<std::size_t>(c)];
      if (w == 0.0) return 0.0;
      return cell_vol * w * std::pow(cell_mean(c), k);
    });
    MoserRung& rung = rep.rungs[static_cast<std::size_t>(i - 1)];
    rung.k = k;
    rung.lhs = std::pow(inv_r3 * integral, 2.0 / k);
    rung.rhs = rhs;
    rung.ratio = rhs > 0.0 ? rung.lhs / rhs
                           : std::numeric_limits<double>::infinity();
  }
  return rep;
}

/// Solves the m-sector problem (m in {2, 4}) with exact sector traces and
/// zero data pinned on the separating axes, so the discrete phases keep
/// exactly disjoint positivity sets.
inline std::vector<ScalarField<2>> solved_sector_phases(
    const MatrixField<2>& field, const Grid<2>& g, int m_phases, double lambda,
    double L, double tol = 1e-10) {
  if (m_phases != 2 && m_phases != 4)
    throw config_error(
        "solved sector phases need m in {2,4} (separating rays must lie on "
        "grid lines); exact phases support any m");
  std::vector<index_t> axis_nodes;
  const index_t half = g.m / 2;
  for (index_t i = 0; i <= g.m; ++i) {
    for (index_t j = 0; j <= g.m; ++j) {
      const std::array<index_t, 2> iv{i, j};
      if (g.is_boundary(iv)) continue;
      if (j == half || (m_phases == 4 && i == half))
        axis_nodes.push_back(g.node_index(iv));
    }
  }
  std::vector<ScalarField<2>> phases;
  for (int i = 1; i <= m_phases; ++i) {
    BoundaryData<2> bd = BoundaryData<2>::from_exact(
        [=](const Vec<2>& x) { return sector_value(lambda, L, m_phases, i, x); });
    DirichletOptions<2> opts;
    opts.extra_zero_nodes = axis_nodes;
    SolveResult<2> sol = solve_dirichlet(field, g, bd, tol, opts);
    sol.u.tag = "phase-" + std::to_string(i);
    // Zero the complement (where the decoupled solve leaves only solver
    // noise) and clamp in-sector undershoots, so positivity sets stay
    // exactly disjoint and the phases nonnegative.
    const double lo = 2.0 * pi * (i - 1) / m_phases;
    const double hi = 2.0 * pi * i / m_phases;
    const index_t n = g.num_nodes();
    for (index_t nd = 0; nd < n; ++nd) {
      const Vec<2> x = g.node_position(nd);
      double theta = std::atan2(x[1], x[0]);
      if (theta < 0.0) theta += 2.0 * pi;
      const bool inside = x.norm() > 0.0 && theta > lo && theta < hi;
      sol.u[nd] = inside ? std::max(0.0, sol.u[nd]) : 0.0;
    }
    phases.push_back(std::move(sol.u));
  }
  return phases;
}

}  // namespace ellreg
