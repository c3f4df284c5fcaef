#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ellreg/coeff.hpp"
#include "ellreg/common.hpp"
#include "ellreg/exact.hpp"
#include "ellreg/fem.hpp"
#include "ellreg/functionals.hpp"
#include "ellreg/grid.hpp"

namespace ellreg {

template <int N>
struct BlowupSpec {
  Vec<N> x0{};
  double r = 1.0;
  double alpha = 1.0;
  double normalization = 1.0;  // D(x0, u, r)^{1/2}
};

/// Blow-up rescaling
///   u_bar(x) = (u(x0 + r x) - u(x0)) / (r^alpha * normalization),
/// sampled on the target grid through multilinear interpolation.
template <int N>
ScalarField<N> blowup_rescale(const ScalarField<N>& u,
                              const BlowupSpec<N>& spec,
                              const Grid<N>& target) {
  if (!(spec.r > 0.0))
    throw std::invalid_argument("blowup_rescale: radius must be positive");
  if (!(spec.normalization > 0.0))
    throw std::invalid_argument(
        "blowup_rescale: degenerate spec, normalization must be positive "
        "(zero Dirichlet energy?)");
  for (int d = 0; d < N; ++d)
    if (std::abs(spec.x0[d]) + spec.r > 1.0 + 1e-12)
      throw std::invalid_argument(
          "blowup_rescale: image of the target grid leaves the source domain");
  const double denom = std::pow(spec.r, spec.alpha) * spec.normalization;
  const double center_value = u.value(spec.x0);
  ScalarField<N> out(target, "blowup");
  const index_t n = target.num_nodes();
  for (index_t i = 0; i < n; ++i) {
    const Vec<N> x = spec.x0 + target.node_position(i) * spec.r;
    out[i] = (u.value(x) - center_value) / denom;
  }
  return out;
}

/// theta(r) = sup_{rho >= r} rho^-gamma supnorm(rho): the running tail
/// supremum, nonincreasing in r by construction.
inline std::vector<double> blowdown_normalizer(const RadialTrace& supnorms,
                                               double gamma) {
  supnorms.validate();
  if (supnorms.radii.empty())
    throw std::invalid_argument("blowdown_normalizer: empty trace tail");
  std::vector<double> theta(supnorms.radii.size());
  double tail = 0.0;
  for (std::size_t i = supnorms.radii.size(); i-- > 0;) {
    tail = std::max(tail,
                    std::pow(supnorms.radii[i], -gamma) * supnorms.values[i]);
    theta[i] = tail;
  }
  return theta;
}

/// Classical laminate effective tensor: harmonic mean along the lamination
/// axis, arithmetic mean transverse.
template <int N = 2>
SymTensor<N> homogenize_laminate(double lambda, double L, int axis) {
  check_bounds(lambda, L);
  if (axis < 0 || axis >= N)
    throw config_error("homogenize_laminate: axis out of range");
  const double harmonic = 2.0 * lambda * L / (lambda + L);
  const double arithmetic = 0.5 * (lambda + L);
  SymTensor<N> t;
  for (int d = 0; d < N; ++d) t(d, d) = d == axis ? harmonic : arithmetic;
  return t;
}

/// Independent fine-grid oracle for the laminate G-limit: the 1-D cell
/// problem reduces to Riemann sums of 1/a and a over one period of the
/// half-and-half profile.
template <int N = 2>
SymTensor<N> laminate_effective_oracle(double lambda, double L, int axis,
                                       int cells = 1 << 16) {
  check_bounds(lambda, L);
  double inv_sum = 0.0, sum = 0.0;
  for (int i = 0; i < cells; ++i) {
    const double y = (i + 0.5) / cells;  // midpoints of one unit period
    const double a = y < 0.5 ? lambda : L;
    inv_sum += 1.0 / a;
    sum += a;
  }
  SymTensor<N> t;
  for (int d = 0; d < N; ++d)
    t(d, d) = d == axis ? cells / inv_sum : sum / cells;
  return t;
}

struct HomogenizationReport {
  std::vector<double> eps;
  std::vector<double> distances;
  SymTensor<2> effective;
};

/// Solves the Dirichlet problem for laminate(lambda, L, eps) against the
/// constant effective tensor under the same boundary data and reports the
/// L2 distances along the eps list.
inline HomogenizationReport gconv_experiment(double lambda, double L,
                                             const std::vector<double>& eps_list,
                                             const BoundaryData<2>& g,
                                             const Grid<2>& grid, int axis = 0,
                                             double tol = 1e-10) {
  if (eps_list.empty())
    throw config_error("gconv_experiment: empty eps list");
  for (double e : eps_list)
    if (!(e > 0.0) || e / grid.h() < 8.0)
      throw config_error(
          "gconv_experiment: under-resolved period eps = " + format_double(e) +
          " (need >= 8 cells per period, h = " + format_double(grid.h()) +
          ")");
  HomogenizationReport rep;
  rep.effective = homogenize_laminate(lambda, L, axis);
  const MatrixField<2> eff_field = constant_field(rep.effective);
  const ScalarField<2> u_eff = solve_dirichlet(eff_field, grid, g, tol).u;
  for (double e : eps_list) {
    const MatrixField<2> lam = laminate_field<2>(lambda, L, e, axis);
    const ScalarField<2> u_eps = solve_dirichlet(lam, grid, g, tol).u;
    rep.eps.push_back(e);
    rep.distances.push_back(l2_error(u_eps, u_eff));
  }
  return rep;
}

struct ProbeOptions {
  enum class Mode { iterate, sector };
  Mode mode = Mode::iterate;
  int sectors = 2;      // sector mode: family size m
  index_t grid_m = 128;  // iterate mode: solve grid
  int levels = 7;        // iterate mode: dyadic rescaling depth
  std::function<double(const Vec<2>&)> g0;  // initial candidate trace
  double tol = 1e-10;
};

struct ProbeReport {
  double gamma_hat = 0.0;
  double reference = 0.0;
  std::string verdict;
  ExponentReport fit;
  std::vector<double> scales, supnorms, theta;
};

/// Liouville-type growth probe.  In iterate mode, runs the dyadic power
/// iteration: solve on the cube with the current boundary candidate and the
/// field rescaled to the current scale, renormalize by the half-scale
/// sup-norm, repeat; the per-step ratios converge to 2^-gamma for the
/// dominant homogeneous solution.  In sector mode, measures the growth
/// exponent of the exact m-sector family across dyadic balls.  `gamma` is
/// the reference exponent the measurement is compared against.
inline ProbeReport liouville_probe(const MatrixField<2>& field, double gamma,
                                   ProbeOptions opts = {}) {
  if (field.is_grid_sampled())
    throw std::invalid_argument(
        "liouville_probe: grid-sampled fields are not evaluable across "
        "scales; need a zero-homogeneous or periodic kind");
  ProbeReport rep;
  rep.reference = gamma;

  if (opts.mode == ProbeOptions::Mode::sector) {
    const EllipticityBounds b = field.bounds();
    const int m = opts.sectors;
    if (m < 2) throw config_error("liouville_probe: need m >= 2 sectors");
    constexpr int ndir = 1024;
    for (int j = 0; j <= 6; ++j) {
      const double R = std::pow(2.0, j);
      double sup = 0.0;
      for (int i = 0; i < ndir; ++i) {
        const double theta = 2.0 * pi * (i + 0.5) / ndir;
        const Vec<2> x{R * std::cos(theta), R * std::sin(theta)};
        for (int ph = 1; ph <= m; ++ph)
          sup = std::max(sup, sector_value(b.lambda, b.L, m, ph, x));
      }
      rep.scales.push_back(R);
      rep.supnorms.push_back(sup);
    }
  } else {
    const Grid<2> g(opts.grid_m);
    std::function<double(const Vec<2>&)> g0 = opts.g0;
    if (!g0) g0 = [](const Vec<2>& x) { return x[1]; };
    // Boundary node bookkeeping.
    std::vector<index_t> bnodes;
    const index_t n = g.num_nodes();
    for (index_t i = 0; i < n; ++i)
      if (g.is_boundary(g.node_multi(i))) bnodes.push_back(i);
    std::vector<double> data(bnodes.size());
    for (std::size_t i = 0; i < bnodes.size(); ++i)
      data[i] = g0(g.node_position(bnodes[i]));

    double cumulative = 1.0;
    rep.scales.push_back(1.0);
    rep.supnorms.push_back(1.0);
    bool degenerate = false;
    for (int j = 0; j < opts.levels; ++j) {
      const MatrixField<2> fj =
          rescale_field(field, Vec<2>{}, std::pow(2.0, -j));
      const std::vector<double>* data_ptr = &data;
      const std::vector<index_t>* node_ptr = &bnodes;
      const Grid<2>* grid_ptr = &g;
      BoundaryData<2> bd = BoundaryData<2>::expression(
          [data_ptr, node_ptr, grid_ptr](const Vec<2>& x) {
            // Exact match against boundary node positions (solve queries
            // only boundary nodes, in index order).
            const Grid<2>& gg = *grid_ptr;
            const double h = gg.h();
            std::array<index_t, 2> iv{
                static_cast<index_t>(std::llround((x[0] + 1.0) / h)),
                static_cast<index_t>(std::llround((x[1] + 1.0) / h))};
            const index_t idx = gg.node_index(iv);
            const auto it = std::lower_bound(node_ptr->begin(),
                                             node_ptr->end(), idx);
            return (*data_ptr)[static_cast<std::size_t>(
                it - node_ptr->begin())];
          });
      const ScalarField<2> u = solve_dirichlet(fj, g, bd, opts.tol).u;
      const double center = u.value(Vec<2>{});
      double nj = 0.0;
      std::vector<double> next(bnodes.size());
      for (std::size_t i = 0; i < bnodes.size(); ++i) {
        const Vec<2> p = g.node_position(bnodes[i]) * 0.5;
        next[i] = u.value(p) - center;
        nj = std::max(nj, std::abs(next[i]));
      }
      if (!(nj > 1e-13)) {
        degenerate = true;
        break;
      }
      for (double& v : next) v /= nj;
      data = std::move(next);
      cumulative *= nj;
      rep.scales.push_back(std::pow(2.0, -(j + 1)));
      rep.supnorms.push_back(cumulative);
      rep.gamma_hat = -std::log2(nj);  // final-step ratio
    }
    if (degenerate) {
      rep.verdict = "degenerate";
      rep.theta.assign(rep.scales.size(), 0.0);
      return rep;
    }
  }

  // Traces are stored with decreasing scale in iterate mode; fit on
  // ascending radii.
  RadialTrace trace;
  trace.label = "supnorm";
  if (rep.scales.front() > rep.scales.back()) {
    trace.radii.assign(rep.scales.rbegin(), rep.scales.rend());
    trace.values.assign(rep.supnorms.rbegin(), rep.supnorms.rend());
  } else {
    trace.radii = rep.scales;
    trace.values = rep.supnorms;
  }
  // Tail window: the last dyadic octaves, past the power-iteration transient.
  RadialTrace tail;
  tail.label = trace.label;
  const std::size_t keep = std::min<std::size_t>(5, trace.radii.size());
  tail.radii.assign(trace.radii.begin(),
                    trace.radii.begin() + static_cast<std::ptrdiff_t>(keep));
  tail.values.assign(trace.values.begin(),
                     trace.values.begin() + static_cast<std::ptrdiff_t>(keep));
  const GrowthReport gr = growth_exponent(tail);
  rep.fit = gr.fit;
  if (opts.mode == ProbeOptions::Mode::sector) rep.gamma_hat = gr.fit.exponent;
  rep.theta = blowdown_normalizer(trace, rep.gamma_hat);
  rep.verdict = rep.gamma_hat > 0.05 ? "nontrivial-growth" : "degenerate";
  return rep;
}

}  // namespace ellreg
