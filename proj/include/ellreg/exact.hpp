#pragma once

#include <cmath>
#include <vector>

#include "ellreg/common.hpp"
#include "ellreg/grid.hpp"

namespace ellreg {

inline constexpr double pi = 3.14159265358979323846;

/// Growth exponent k = sqrt(lambda/L) of the radial anisotropic field's
/// homogeneous solution r^k sin(theta).
inline double meyers_exponent(double lambda, double L) {
  return std::sqrt(lambda / L);
}

/// Growth exponent of the m-sector family: k*_m = (m/2) sqrt(lambda/L).
inline double sector_exponent(double lambda, double L, int m) {
  return 0.5 * m * std::sqrt(lambda / L);
}

/// Guaranteed radial decay exponent for nonnegative subsolution pairs in
/// dimension n:
///   mu = sqrt((lambda/L)(n-1)) - (n-2)/2.
/// In 2-D this reduces to sqrt(lambda/L).  It is a lower bound: particular
/// solutions may decay faster, so traces normalized by r^{n-2+2mu} should be
/// nondecreasing, not constant.
inline double decay_exponent(double lambda, double L, int n) {
  return std::sqrt((lambda / L) * (n - 1)) - 0.5 * (n - 2);
}

/// Homogeneity degree s of the exact 3-D axial solution r^{s-1} x_3 for the
/// radial anisotropic tensor: s solves s(s+1) = 2 lambda/L, i.e.
///   s = sqrt(1/4 + 2 lambda/L) - 1/2.
/// Always >= decay_exponent(lambda, L, 3); equals 1 when lambda = L (the
/// harmonic case u = x_3).
inline double axial_exponent_3d(double lambda, double L) {
  return std::sqrt(0.25 + 2.0 * (lambda / L)) - 0.5;
}

/// Pointwise value of the 2-D homogeneous solution r^k sin(theta).
inline double meyers_value(double lambda, double L, const Vec<2>& x) {
  const double r = x.norm();
  if (r == 0.0) return 0.0;
  const double k = meyers_exponent(lambda, L);
  return std::pow(r, k - 1.0) * x[1];
}

/// Exact 2-D solution u = r^k sin(theta), k = sqrt(lambda/L), sampled at the
/// nodes, with its analytic gradient attached for singularity-aware
/// quadrature.
inline ScalarField<2> meyers_solution(double lambda, double L,
                                      const Grid<2>& g) {
  const double k = meyers_exponent(lambda, L);
  ScalarField<2> u = sample_on_grid(
      g, [=](const Vec<2>& x) { return meyers_value(lambda, L, x); },
      "solution");
  u.exact_gradient = [k](const Vec<2>& x) -> Vec<2> {
    const double r = x.norm();
    if (r == 0.0) return Vec<2>{};
    const double c = (k - 1.0) * std::pow(r, k - 3.0) * x[1];
    return Vec<2>{c * x[0], c * x[1] + std::pow(r, k - 1.0)};
  };
  return u;
}

/// Pointwise value of sector phase i (1-based) of the m-sector family:
/// r^{k*_m} |sin((m/2) theta)| on theta in [2 pi (i-1)/m, 2 pi i/m], else 0.
inline double sector_value(double lambda, double L, int m, int i,
                           const Vec<2>& x) {
  const double r = x.norm();
  if (r == 0.0) return 0.0;
  double theta = std::atan2(x[1], x[0]);
  if (theta < 0.0) theta += 2.0 * pi;
  const double lo = 2.0 * pi * (i - 1) / m;
  const double hi = 2.0 * pi * i / m;
  if (theta < lo || theta > hi) return 0.0;
  const double kappa = sector_exponent(lambda, L, m);
  return std::pow(r, kappa) * std::abs(std::sin(0.5 * m * theta));
}

/// The m nonnegative sector phases with pairwise disjoint supports, each
/// vanishing at the origin, with analytic gradients attached (one-sided on
/// the separating rays, where the phases vanish).
inline std::vector<ScalarField<2>> sector_solutions(double lambda, double L,
                                                    int m, const Grid<2>& g) {
  if (m < 2) throw config_error("sector_solutions: need m >= 2 phases");
  const double kappa = sector_exponent(lambda, L, m);
  std::vector<ScalarField<2>> phases;
  phases.reserve(m);
  for (int i = 1; i <= m; ++i) {
    ScalarField<2> u = sample_on_grid(
        g, [=](const Vec<2>& x) { return sector_value(lambda, L, m, i, x); },
        "phase-" + std::to_string(i));
    const double sigma = (i % 2 == 1) ? 1.0 : -1.0;
    u.exact_gradient = [=](const Vec<2>& x) -> Vec<2> {
      const double r = x.norm();
      if (r == 0.0) return Vec<2>{};
      double theta = std::atan2(x[1], x[0]);
      if (theta < 0.0) theta += 2.0 * pi;
      if (theta < 2.0 * pi * (i - 1) / m || theta > 2.0 * pi * i / m)
        return Vec<2>{};
      const double S = sigma * std::sin(0.5 * m * theta);
      const double C = sigma * std::cos(0.5 * m * theta);
      const double c = x[0] / r, s = x[1] / r;
      const double rad = kappa * S, tan = 0.5 * m * C;
      const double scale = std::pow(r, kappa - 1.0);
      return Vec<2>{scale * (rad * c - tan * s), scale * (rad * s + tan * c)};
    };
    phases.push_back(std::move(u));
  }
  return phases;
}

/// Pointwise value of the 3-D axis-aligned solution r^{s-1} x_3 for the
/// radial anisotropic tensor, s = axial_exponent_3d(lambda, L).
inline double meyers_value_3d(double lambda, double L, const Vec<3>& x) {
  const double r = x.norm();
  if (r == 0.0) return 0.0;
  const double s = axial_exponent_3d(lambda, L);
  return std::pow(r, s - 1.0) * x[2];
}

/// Exact 3-D solution u = r^{s-1} x_3 with analytic gradient attached.
inline ScalarField<3> meyers_solution_3d(double lambda, double L,
                                         const Grid<3>& g) {
  const double s = axial_exponent_3d(lambda, L);
  ScalarField<3> u = sample_on_grid(
      g, [=](const Vec<3>& x) { return meyers_value_3d(lambda, L, x); },
      "solution");
  u.exact_gradient = [s](const Vec<3>& x) -> Vec<3> {
    const double r = x.norm();
    if (r == 0.0) return Vec<3>{};
    const double c = (s - 1.0) * std::pow(r, s - 3.0) * x[2];
    return Vec<3>{c * x[0], c * x[1], c * x[2] + std::pow(r, s - 1.0)};
  };
  return u;
}

}  // namespace ellreg
