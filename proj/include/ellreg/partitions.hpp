#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ellreg/common.hpp"
#include "ellreg/exact.hpp"

namespace ellreg {

/// Geodesic cap on S^{n-1} (ambient n in {2,3,4}) with polar opening theta0.
struct CapSpec {
  int ambient_n = 3;
  double theta0 = 0.0;
};

struct EigReport {
  double lambda1 = 0.0;
  int bisection_steps = 0;
  double residual = 0.0;  // |f(theta0)| of the shooting solution
};

/// Partition of a sphere: m arcs of S^1, or two complementary caps of
/// S^{n-1}.
struct PartitionSpec {
  enum class Kind { circle, caps };
  Kind kind = Kind::circle;
  std::vector<double> lengths;  // circle: m arc lengths summing to 2 pi
  int ambient_n = 3;            // caps
  double theta0 = 0.0;          // caps: angles (theta0, pi - theta0)
};

/// First Dirichlet eigenvalue of an arc: exactly (pi / length)^2.
inline double arc_eigenvalue(double length) {
  if (!(length > 0.0 && length <= 2.0 * pi + 1e-12))
    throw std::invalid_argument("arc_eigenvalue: length must be in (0, 2 pi]");
  const double v = pi / length;
  return v * v;
}

namespace detail {

/// Shooting integration of (sin^{n-2} f')' + Lambda sin^{n-2} f = 0 from a
/// series start at theta -> 0, by fixed-step RK4 on (f, p = sin^{n-2} f').
/// Returns the number of interior sign changes of f and the terminal value
/// f(theta0).
inline std::pair<int, double> cap_shoot(int n, double theta0, double Lambda,
                                        int steps = 2000) {
  const double dt = theta0 / steps;
  const auto spow = [n](double t) {
    return n == 2 ? 1.0 : (n == 3 ? std::sin(t) : std::sin(t) * std::sin(t));
  };
  // Series start over the first step: f = 1 - Lambda t^2 / (2(n-1)) + O(t^4).
  double t = dt;
  double f = 1.0 - Lambda * dt * dt / (2.0 * (n - 1));
  double p = spow(dt) * (-Lambda * dt / (n - 1));
  int crossings = 0;
  double prev_sign = f > 0.0 ? 1.0 : (f < 0.0 ? -1.0 : 0.0);

  const auto rhs = [&](double tt, double ff, double pp, double& df,
                       double& dp) {
    const double s = spow(tt);
    df = pp / s;
    dp = -Lambda * s * ff;
  };
  for (int i = 1; i < steps; ++i) {
    double k1f, k1p, k2f, k2p, k3f, k3p, k4f, k4p;
    rhs(t, f, p, k1f, k1p);
    rhs(t + 0.5 * dt, f + 0.5 * dt * k1f, p + 0.5 * dt * k1p, k2f, k2p);
    rhs(t + 0.5 * dt, f + 0.5 * dt * k2f, p + 0.5 * dt * k2p, k3f, k3p);
    rhs(t + dt, f + dt * k3f, p + dt * k3p, k4f, k4p);
    f += dt / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    t += dt;
    const double sign = f > 0.0 ? 1.0 : (f < 0.0 ? -1.0 : 0.0);
    if (sign != 0.0 && prev_sign != 0.0 && sign != prev_sign) ++crossings;
    if (sign != 0.0) prev_sign = sign;
  }
  return {crossings, f};
}

/// Flat small-cap estimate: first Dirichlet eigenvalue of the Euclidean
/// (n-1)-ball of radius theta0.
inline double flat_cap_estimate(int n, double theta0) {
  const double j0 = n == 2 ? 0.5 * pi : (n == 3 ? 2.404825557695773 : pi);
  return (j0 / theta0) * (j0 / theta0);
}

}  // namespace detail

/// First Dirichlet eigenvalue of a spherical cap by RK4 shooting (fixed step
/// theta0/2000) and bisection on Lambda: the predicate is "f crosses zero
/// before theta0", monotone in Lambda by Sturm comparison.
inline EigReport cap_eigenvalue(const CapSpec& cap, double tol = 1e-10) {
  if (!(tol > 0.0)) throw config_error("cap_eigenvalue: tol must be > 0");
  if (cap.ambient_n < 2 || cap.ambient_n > 4)
    throw config_error("cap_eigenvalue: ambient dimension must be 2, 3, or 4");
  if (!(cap.theta0 > 0.0 && cap.theta0 < pi))
    throw std::invalid_argument(
        "cap_eigenvalue: opening angle must lie in (0, pi)");
  const int n = cap.ambient_n;
  const auto crosses = [&](double Lambda) {
    return detail::cap_shoot(n, cap.theta0, Lambda).first >= 1;
  };
  const double flat = detail::flat_cap_estimate(n, cap.theta0);
  double lo = 0.5 * flat, hi = 2.0 * flat;
  int widen = 0;
  while (crosses(lo)) {
    lo *= 0.5;
    if (++widen > 80)
      throw numeric_error("cap_eigenvalue: bracketing failure, scanned [" +
                          format_double(lo) + "," + format_double(hi) + "]");
  }
  widen = 0;
  while (!crosses(hi)) {
    hi *= 2.0;
    if (++widen > 80)
      throw numeric_error("cap_eigenvalue: bracketing failure, scanned [" +
                          format_double(lo) + "," + format_double(hi) + "]");
  }
  EigReport rep;
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (crosses(mid) ? hi : lo) = mid;
    ++rep.bisection_steps;
    if (rep.bisection_steps > 200) break;
  }
  rep.lambda1 = 0.5 * (lo + hi);
  rep.residual = std::abs(detail::cap_shoot(n, cap.theta0, rep.lambda1).second);
  return rep;
}

/// (1/m) sum_i sqrt(Lambda_1(piece)).
inline double partition_objective(const PartitionSpec& spec) {
  if (spec.kind == PartitionSpec::Kind::circle) {
    if (spec.lengths.size() < 2)
      throw std::invalid_argument("partition_objective: need m >= 2 arcs");
    double sum = 0.0, total = 0.0;
    for (double l : spec.lengths) {
      if (!(l > 0.0))
        throw std::invalid_argument("partition_objective: arc lengths must be positive");
      sum += std::sqrt(arc_eigenvalue(l));
      total += l;
    }
    if (std::abs(total - 2.0 * pi) > 1e-8)
      throw std::invalid_argument(
          "partition_objective: arc lengths must sum to 2 pi (got " +
          format_double(total) + ")");
    return sum / static_cast<double>(spec.lengths.size());
  }
  const double a = cap_eigenvalue({spec.ambient_n, spec.theta0}).lambda1;
  const double b = cap_eigenvalue({spec.ambient_n, pi - spec.theta0}).lambda1;
  return 0.5 * (std::sqrt(a) + std::sqrt(b));
}

struct PartitionResult {
  PartitionSpec spec;
  double value = 0.0;
  int iterations = 0;
};

/// Minimizes the partition objective: projected gradient over arc lengths on
/// S^1; golden-section over the cap angle for two caps of S^{n-1}.
inline PartitionResult optimize_partition(int sphere_dim, int m) {
  PartitionResult res;
  if (sphere_dim == 1) {
    if (m < 2) throw config_error("optimize_partition: need m >= 2 arcs");
    // Deterministic unequal start on the simplex {l > 0, sum = 2 pi}.
    std::vector<double> l(static_cast<std::size_t>(m));
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      l[static_cast<std::size_t>(i)] = 1.0 + 0.2 * std::sin(i + 1.0);
      total += l[static_cast<std::size_t>(i)];
    }
    for (double& v : l) v *= 2.0 * pi / total;

    const auto objective = [&](const std::vector<double>& x) {
      double s = 0.0;
      for (double v : x) s += pi / v;
      return s / m;
    };
    double f = objective(l);
    int it = 0;
    for (; it < 200000; ++it) {
      std::vector<double> grad(l.size());
      double mean = 0.0;
      for (std::size_t i = 0; i < l.size(); ++i) {
        grad[i] = -(pi / m) / (l[i] * l[i]);
        mean += grad[i];
      }
      mean /= l.size();
      double gnorm = 0.0;
      for (double& gi : grad) {
        gi -= mean;  // project onto the fixed-sum constraint
        gnorm = std::max(gnorm, std::abs(gi));
      }
      if (gnorm < 1e-13) break;
      double step = 1.0;
      bool moved = false;
      while (step > 1e-18) {
        std::vector<double> cand(l.size());
        bool feasible = true;
        for (std::size_t i = 0; i < l.size(); ++i) {
          cand[i] = l[i] - step * grad[i];
          if (cand[i] <= 0.0) feasible = false;
        }
        if (feasible) {
          const double fc = objective(cand);
          if (fc < f) {
            l = std::move(cand);
            f = fc;
            moved = true;
            break;
          }
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    res.spec.kind = PartitionSpec::Kind::circle;
    res.spec.lengths = std::move(l);
    res.value = f;
    res.iterations = it;
    return res;
  }

  if (sphere_dim != 2 && sphere_dim != 3)
    throw config_error("optimize_partition: sphere dimension must be 1, 2, or 3");
  if (m != 2)
    throw config_error(
        "optimize_partition: sphere partitions are restricted to two "
        "complementary caps (m = 2)");
  const int ambient = sphere_dim + 1;
  const auto objective = [&](double theta) {
    PartitionSpec s;
    s.kind = PartitionSpec::Kind::caps;
    s.ambient_n = ambient;
    s.theta0 = theta;
    return partition_objective(s);
  };
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.4, b = pi - 0.4;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = objective(c), fd = objective(d);
  int it = 0;
  while (b - a > 1e-6) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = objective(d);
    }
    ++it;
  }
  res.spec.kind = PartitionSpec::Kind::caps;
  res.spec.ambient_n = ambient;
  res.spec.theta0 = 0.5 * (a + b);
  res.value = objective(res.spec.theta0);
  res.iterations = it;
  return res;
}

}  // namespace ellreg
