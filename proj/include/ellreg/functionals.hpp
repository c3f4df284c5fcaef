#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ellreg/coeff.hpp"
#include "ellreg/common.hpp"
#include "ellreg/exact.hpp"
#include "ellreg/grid.hpp"
#include "ellreg/parallel.hpp"
#include "ellreg/quadrature.hpp"

namespace ellreg {

/// Values indexed by strictly increasing radii.
struct RadialTrace {
  std::vector<double> radii;
  std::vector<double> values;
  std::string label;

  void validate() const {
    if (radii.size() != values.size())
      throw std::invalid_argument("radial trace: radius/value size mismatch");
    for (std::size_t i = 1; i < radii.size(); ++i)
      if (!(radii[i] > radii[i - 1]))
        throw std::invalid_argument(
            "radial trace: radii must be strictly increasing");
  }
};

struct MonotonicityReport {
  bool is_monotone = false;
  double worst_violation = 0.0;  // most negative forward difference / scale
  double r_lo = 0.0, r_hi = 0.0;
};

struct ExponentReport {
  double exponent = 0.0;
  double residual = 0.0;  // RMS residual of the log-log least-squares fit
  double r_min = 0.0, r_max = 0.0;
};

namespace detail {

/// Energy density integrated over {r_in < |x - x0| <= r_out} (r_in < 0 means
/// a full ball).  field == nullptr integrates the plain |grad u|^2.
///
/// Nodal data uses cell-center Q1 gradients weighted by inclusion fractions.
/// When `u` carries an analytic gradient and hooks are allowed, shell-crossing
/// cells and cells near the origin (where closed-form solutions concentrate
/// their energy) are integrated by 4^N midpoint subsamples of the analytic
/// density, which never touches the singular point itself.
template <int N>
double region_energy(const ScalarField<N>& u, const MatrixField<N>* field,
                     const Vec<N>& x0, double r_in, double r_out,
                     bool allow_hook = true) {
  const Grid<N>& g = u.grid;
  const double h = g.h();
  const double cell_vol = std::pow(h, N);
  const std::vector<double> frac =
      r_in < 0.0 ? ball_cell_fractions(g, x0, r_out)
                 : annulus_cell_fractions(g, x0, r_in, r_out);
  const bool analytic = allow_hook && static_cast<bool>(u.exact_gradient);
  const double near_r = 8.0 * h;
  constexpr double inv_sub = N == 2 ? 1.0 / 16.0 : 1.0 / 64.0;

  auto nodal_density = [&](index_t c, const std::array<index_t, N>& cv) {
    const Vec<N> grad = u.cell_gradient(cv);
    if (!field) return grad.dot(grad);
    return field->eval(g.cell_center(cv)).form(grad);
  };
  auto analytic_density = [&](const Vec<N>& x) {
    const Vec<N> grad = u.exact_gradient(x);
    if (!field) return grad.dot(grad);
    return field->eval(x).form(grad);
  };

  return chunked_sum(g.num_cells(), [&](index_t c) -> double {
    const double w = frac[static_cast<std::size_t>(c)];
    if (w == 0.0) return 0.0;
    const auto cv = g.cell_multi(c);
    if (analytic) {
      const Vec<N> center = g.cell_center(cv);
      if (w < 1.0 || center.norm() <= near_r) {
        double acc = 0.0;
        for_each_subsample(g, cv, [&](const Vec<N>& x) {
          const double d = (x - x0).norm();
          if (d <= r_out && (r_in < 0.0 || d > r_in))
            acc += analytic_density(x);
        });
        return cell_vol * inv_sub * acc;
      }
      return cell_vol * analytic_density(center);
    }
    return cell_vol * w * nodal_density(c, cv);
  });
}

inline void fit_window_check(const RadialTrace& t) {
  t.validate();
  if (t.radii.size() < 4)
    throw std::invalid_argument("exponent fit: window has fewer than 4 radii");
  for (double v : t.values)
    if (!(v > 0.0))
      throw std::invalid_argument("exponent fit: nonpositive value in window");
}

/// Ordinary least squares slope of log(value) against log(radius).
inline ExponentReport loglog_fit(const RadialTrace& t) {
  fit_window_check(t);
  const std::size_t n = t.radii.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(t.radii[i]);
    const double y = std::log(t.values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  ExponentReport rep;
  rep.exponent = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - rep.exponent * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(t.values[i]) -
                     (intercept + rep.exponent * std::log(t.radii[i]));
    ss += e * e;
  }
  rep.residual = std::sqrt(ss / n);
  rep.r_min = t.radii.front();
  rep.r_max = t.radii.back();
  return rep;
}

}  // namespace detail

/// Energy integral of A grad(u).grad(u) over the centered ball B_r.
template <int N>
double dirichlet_energy_ball(const ScalarField<N>& u,
                             const MatrixField<N>& field, double r) {
  if (!(r > 0.0 && r <= 1.0))
    throw std::invalid_argument("dirichlet_energy_ball: need 0 < r <= 1");
  return detail::region_energy(u, &field, Vec<N>{}, -1.0, r);
}

/// Plain Dirichlet energy over B_r(x0), always integrated with the discrete
/// cell-gradient quadrature (so blow-up normalizations are self-consistent
/// with the interpolated fields they normalize).
template <int N>
double gradient_energy_ball(const ScalarField<N>& u, const Vec<N>& x0,
                            double r) {
  if (!(r > 0.0)) throw std::invalid_argument("gradient_energy_ball: r > 0");
  return detail::region_energy(u, static_cast<const MatrixField<N>*>(nullptr),
                               x0, -1.0, r, /*allow_hook=*/false);
}

/// Scaled Dirichlet energy D(x0, u, r) = r^{-(N-2+2 alpha)} int_{B_r(x0)}
/// |grad u|^2 — the blow-up normalization.
template <int N>
double scaled_dirichlet_energy(const ScalarField<N>& u, const Vec<N>& x0,
                               double r, double alpha) {
  return std::pow(r, -(N - 2 + 2.0 * alpha)) * gradient_energy_ball(u, x0, r);
}

/// The m-phase product Phi(r) = prod_i r^{-2 k*_m} E_i(r), with
/// k*_m = (m/2) sqrt(lambda/L) and E_i the A-weighted energy of phase i over
/// B_r.  Preconditions checked: phases vanish at the origin and have
/// pointwise products below 1e-10 (sup_i)(sup_j).
template <int N>
RadialTrace acf_product(const std::vector<ScalarField<N>>& phases,
                        const MatrixField<N>& field,
                        const std::vector<double>& radii) {
  if (phases.empty())
    throw std::invalid_argument("acf_product: need at least one phase");
  const int m = static_cast<int>(phases.size());
  const Grid<N>& g = phases.front().grid;
  const index_t n = g.num_nodes();

  std::vector<double> sup(phases.size(), 0.0);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    if (phases[i].grid.m != g.m)
      throw std::invalid_argument("acf_product: phases on different grids");
    for (double v : phases[i].values)
      sup[i] = std::max(sup[i], std::abs(v));
  }

  std::array<index_t, N> origin_iv;
  origin_iv.fill(g.m / 2);
  const index_t origin = g.node_index(origin_iv);
  const double sup_all = *std::max_element(sup.begin(), sup.end());
  for (std::size_t i = 0; i < phases.size(); ++i)
    if (std::abs(phases[i][origin]) > 1e-10 * std::max(sup_all, 1e-300))
      throw std::invalid_argument("acf_product: phase " + std::to_string(i + 1) +
                                  " does not vanish at the origin (value " +
                                  format_double(phases[i][origin]) + ")");

  for (std::size_t i = 0; i < phases.size(); ++i) {
    for (std::size_t j = i + 1; j < phases.size(); ++j) {
      const double tol = 1e-10 * sup[i] * sup[j];
      for (index_t nd = 0; nd < n; ++nd) {
        const double prod = std::abs(phases[i][nd] * phases[j][nd]);
        if (prod > tol) {
          const auto iv = g.node_multi(nd);
          std::string cell = "(";
          for (int d = 0; d < N; ++d)
            cell += (d ? "," : "") + std::to_string(iv[d]);
          cell += ")";
          throw std::invalid_argument(
              "acf_product: phases " + std::to_string(i + 1) + " and " +
              std::to_string(j + 1) + " overlap at node " + cell +
              " (product " + format_double(prod) + " > tol " +
              format_double(tol) + "); positivity sets must be disjoint");
        }
      }
    }
  }

  const EllipticityBounds b = field.bounds();
  const double kstar = sector_exponent(b.lambda, b.L, m);
  RadialTrace trace;
  trace.label = "phi";
  trace.radii = radii;
  trace.values.reserve(radii.size());
  for (double r : radii) {
    double phi = 1.0;
    for (const auto& ph : phases)
      phi *= std::pow(r, -2.0 * kstar) * dirichlet_energy_ball(ph, field, r);
    trace.values.push_back(phi);
  }
  trace.validate();
  return trace;
}

/// Gamma-weighted energy int_{B_r \ B_{8h}} Gamma (A grad u . grad u); the
/// core ball around the point load is excluded.
inline double weighted_energy(const ScalarField<3>& u,
                              const MatrixField<3>& field,
                              const ScalarField<3>& gamma, double r) {
  const Grid<3>& g = u.grid;
  if (gamma.grid.m != g.m)
    throw std::invalid_argument("weighted_energy: grid mismatch with gamma");
  const double core = 8.0 * g.h();
  if (!(r >= core))
    throw std::invalid_argument(
        "weighted_energy: radius " + format_double(r) +
        " is below the excluded core 8h = " + format_double(core));
  const auto frac = annulus_cell_fractions(g, Vec<3>{}, core, r);
  const double cell_vol = std::pow(g.h(), 3);
  const bool analytic = static_cast<bool>(u.exact_gradient);
  return chunked_sum(g.num_cells(), [&](index_t c) -> double {
    const double w = frac[static_cast<std::size_t>(c)];
    if (w == 0.0) return 0.0;
    const auto cv = g.cell_multi(c);
    if (analytic && w < 1.0) {
      double acc = 0.0;
      detail::for_each_subsample(g, cv, [&](const Vec<3>& x) {
        const double d = x.norm();
        if (d > core && d <= r) {
          const Vec<3> grad = u.exact_gradient(x);
          acc += gamma.value(x) * field.eval(x).form(grad);
        }
      });
      return cell_vol * acc / 64.0;
    }
    const auto nodes = g.cell_nodes(cv);
    double gc = 0.0;
    for (index_t nd : nodes) gc += gamma[nd];
    gc /= nodes.size();
    const Vec<3> grad =
        analytic ? u.exact_gradient(g.cell_center(cv)) : u.cell_gradient(cv);
    return cell_vol * w * gc * field.eval(g.cell_center(cv)).form(grad);
  });
}

/// Decay-normalized energy trace r -> r^{-(n-2+2mu)} E(r) in n = 3.
inline RadialTrace decay_trace(const ScalarField<3>& u,
                               const MatrixField<3>& field,
                               const std::vector<double>& radii, double mu) {
  RadialTrace t;
  t.label = "decay";
  t.radii = radii;
  t.values.reserve(radii.size());
  for (double r : radii)
    t.values.push_back(std::pow(r, -(1.0 + 2.0 * mu)) *
                       dirichlet_energy_ball(u, field, r));
  t.validate();
  return t;
}

/// Forward-difference monotonicity check, violations measured relative to
/// the largest |value|.
inline MonotonicityReport check_monotone(const RadialTrace& t, double tol) {
  t.validate();
  if (t.radii.size() < 2)
    throw std::invalid_argument("check_monotone: need at least 2 radii");
  double scale = 0.0;
  for (double v : t.values) scale = std::max(scale, std::abs(v));
  MonotonicityReport rep;
  rep.r_lo = t.radii[0];
  rep.r_hi = t.radii[1];
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < t.values.size(); ++i) {
    const double d =
        scale > 0.0 ? (t.values[i + 1] - t.values[i]) / scale : 0.0;
    if (d < worst) {
      worst = d;
      rep.r_lo = t.radii[i];
      rep.r_hi = t.radii[i + 1];
    }
  }
  rep.worst_violation = worst;
  rep.is_monotone = worst >= -tol;
  return rep;
}

/// Exponent alpha from a trace expected to scale like r^{2 alpha}: half the
/// log-log slope.
inline ExponentReport holder_from_decay(const RadialTrace& t) {
  ExponentReport rep = detail::loglog_fit(t);
  rep.exponent *= 0.5;
  return rep;
}

/// Hole-filling arithmetic: an energy that shrinks by the fixed factor t per
/// dyadic step decays like r^{2 alpha} with alpha = -log2(t) / 2.
inline double hole_filling_exponent(double t) {
  if (!(t > 0.0 && t < 1.0))
    throw std::invalid_argument(
        "hole_filling_exponent: decay ratio must lie in (0, 1)");
  return -0.5 * std::log2(t);
}

/// max - min of u over grid nodes within B_r(x0), per radius.
template <int N>
RadialTrace oscillation_trace(const ScalarField<N>& u, const Vec<N>& x0,
                              const std::vector<double>& radii) {
  const Grid<N>& g = u.grid;
  const index_t n = g.num_nodes();
  RadialTrace t;
  t.label = "oscillation";
  t.radii = radii;
  for (double r : radii) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (index_t i = 0; i < n; ++i) {
      if ((g.node_position(i) - x0).norm() <= r) {
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
      }
    }
    if (!(hi >= lo))
      throw std::invalid_argument("oscillation_trace: no nodes inside radius " +
                                  format_double(r));
    t.values.push_back(hi - lo);
  }
  t.validate();
  return t;
}

/// Log-log slope of the oscillation trace: the Campanato-style Hölder probe.
template <int N>
ExponentReport holder_exponent(const ScalarField<N>& u, const Vec<N>& x0,
                               const std::vector<double>& radii) {
  return detail::loglog_fit(oscillation_trace(u, x0, radii));
}

struct GrowthReport {
  ExponentReport fit;
  std::vector<double> theta;  // running tail sup of rho^-gamma * supnorm
};

/// Growth exponent from sup-norms on increasing balls, plus the blow-down
/// normalizer sequence theta(R_j) = sup_{rho >= R_j} rho^-gamma supnorm(rho)
/// evaluated at the fitted exponent.
inline GrowthReport growth_exponent(const RadialTrace& supnorms) {
  GrowthReport rep;
  rep.fit = detail::loglog_fit(supnorms);
  rep.theta.assign(supnorms.values.size(), 0.0);
  double tail = 0.0;
  for (std::size_t i = supnorms.values.size(); i-- > 0;) {
    tail = std::max(tail, std::pow(supnorms.radii[i], -rep.fit.exponent) *
                              supnorms.values[i]);
    rep.theta[i] = tail;
  }
  return rep;
}

/// Default dyadic fit window {2^-6, ..., 2^-1}.
inline std::vector<double> dyadic_radii(int j_min = 1, int j_max = 6) {
  std::vector<double> r;
  for (int j = j_max; j >= j_min; --j) r.push_back(std::pow(2.0, -j));
  return r;
}

}  // namespace ellreg
