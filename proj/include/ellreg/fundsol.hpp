#pragma once

#include <cmath>
#include <string>

#include "ellreg/coeff.hpp"
#include "ellreg/common.hpp"
#include "ellreg/fem.hpp"
#include "ellreg/functionals.hpp"
#include "ellreg/grid.hpp"

namespace ellreg {

/// Discrete Green-function proxy: point-load solution on the cube with zero
/// Dirichlet data.  Quadratures must stay outside the core ball (radius 8h)
/// around the load node.
struct FundamentalSolutionField {
  ScalarField<3> gamma;
  index_t load_node = 0;
  double core_radius = 0.0;
  bool negativity_flag = false;  // set when gamma < -1e-8 on the probe annulus
  double min_annulus_value = 0.0;
  SolveReport solve;
};

struct BoundsReport {
  double C1 = 0.0, C2 = 0.0;
  double r_in = 0.0, r_out = 0.0;
  index_t m = 0;
};

/// Solves the unit point-load problem at the center node with zero boundary
/// data and checks positivity on the annulus 8h <= |x| <= 1/2.
inline FundamentalSolutionField compute_fundamental(const MatrixField<3>& field,
                                                    const Grid<3>& g,
                                                    double tol = 1e-10) {
  if (g.m < 48)
    throw config_error(
        "compute_fundamental: need m >= 48 so the probe annulus clears the "
        "core (got m = " +
        std::to_string(g.m) + ")");
  std::array<index_t, 3> civ{g.m / 2, g.m / 2, g.m / 2};
  const index_t center = g.node_index(civ);

  DirichletOptions<3> opts;
  opts.load.assign(static_cast<std::size_t>(g.num_nodes()), 0.0);
  opts.load[static_cast<std::size_t>(center)] = 1.0;  // unit total flux
  SolveResult<3> sol =
      solve_dirichlet(field, g, BoundaryData<3>::constant(0.0), tol, opts);

  FundamentalSolutionField fs;
  fs.gamma = std::move(sol.u);
  fs.gamma.tag = "fundamental";
  fs.load_node = center;
  fs.core_radius = 8.0 * g.h();
  fs.solve = sol.report;

  double lo = std::numeric_limits<double>::infinity();
  const index_t n = g.num_nodes();
  for (index_t i = 0; i < n; ++i) {
    const double d = g.node_position(i).norm();
    if (d >= fs.core_radius && d <= 0.5) lo = std::min(lo, fs.gamma[i]);
  }
  fs.min_annulus_value = lo;
  fs.negativity_flag = lo < -1e-8;
  return fs;
}

/// Empirical two-sided bound constants: min/max of Gamma(x) |x|^{n-2} over
/// the annulus nodes.
inline BoundsReport bounds_ratio(const FundamentalSolutionField& fs,
                                 double r_in, double r_out) {
  const Grid<3>& g = fs.gamma.grid;
  if (!(fs.core_radius <= r_in && r_in < r_out && r_out <= 0.5))
    throw std::invalid_argument(
        "bounds_ratio: need 8h <= r_in < r_out <= 1/2 (8h = " +
        format_double(fs.core_radius) + ")");
  BoundsReport rep;
  rep.r_in = r_in;
  rep.r_out = r_out;
  rep.m = g.m;
  rep.C1 = std::numeric_limits<double>::infinity();
  rep.C2 = -rep.C1;
  const index_t n = g.num_nodes();
  bool any = false;
  for (index_t i = 0; i < n; ++i) {
    const double d = g.node_position(i).norm();
    if (d < r_in || d > r_out) continue;
    const double v = fs.gamma[i] * d;  // |x|^{n-2}, n = 3
    rep.C1 = std::min(rep.C1, v);
    rep.C2 = std::max(rep.C2, v);
    any = true;
  }
  if (!any)
    throw std::invalid_argument("bounds_ratio: annulus contains no nodes");
  return rep;
}

/// Plain gradient energy of Gamma over the annulus B_{3r/2} \ B_r.
inline double annulus_gradient_energy(const FundamentalSolutionField& fs,
                                      double r) {
  if (!(r >= fs.core_radius && 1.5 * r <= 0.5))
    throw std::invalid_argument(
        "annulus_gradient_energy: need 8h <= r and 3r/2 <= 1/2");
  return detail::region_energy(fs.gamma,
                               static_cast<const MatrixField<3>*>(nullptr),
                               Vec<3>{}, r, 1.5 * r);
}

}  // namespace ellreg
