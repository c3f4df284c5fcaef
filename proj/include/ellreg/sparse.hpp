#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ellreg/common.hpp"
#include "ellreg/parallel.hpp"

namespace ellreg {

/// Compressed sparse row matrix (square, structurally symmetric).
struct SparseMatrix {
  index_t n = 0;
  std::vector<index_t> rowptr;
  std::vector<std::int32_t> col;
  std::vector<double> val;

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    parallel_for(n, [&](index_t b, index_t e) {
      for (index_t i = b; i < e; ++i) {
        double s = 0.0;
        for (index_t p = rowptr[static_cast<std::size_t>(i)];
             p < rowptr[static_cast<std::size_t>(i) + 1]; ++p)
          s += val[static_cast<std::size_t>(p)] *
               x[static_cast<std::size_t>(col[static_cast<std::size_t>(p)])];
        y[static_cast<std::size_t>(i)] = s;
      }
    });
  }

  double diagonal(index_t i) const {
    for (index_t p = rowptr[static_cast<std::size_t>(i)];
         p < rowptr[static_cast<std::size_t>(i) + 1]; ++p)
      if (col[static_cast<std::size_t>(p)] == i)
        return val[static_cast<std::size_t>(p)];
    return 0.0;
  }
};

struct CgResult {
  index_t iterations = 0;
  double rel_residual = 0.0;
  std::vector<double> residual_tail;  // last few residuals, for diagnostics
};

namespace detail {

inline double det_dot(const std::vector<double>& a,
                      const std::vector<double>& b) {
  return chunked_sum(static_cast<index_t>(a.size()), [&](index_t i) {
    return a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(i)];
  });
}

}  // namespace detail

/// Jacobi-preconditioned conjugate gradients.  All inner products use the
/// fixed-chunk deterministic reduction, so iterates are bitwise reproducible
/// for any worker count.  Throws numeric_error with the tail of the residual
/// history if the iteration cap is reached.
inline CgResult pcg_solve(const SparseMatrix& K, const std::vector<double>& b,
                          std::vector<double>& x, double tol,
                          index_t max_iter) {
  const index_t n = K.n;
  std::vector<double> inv_diag(static_cast<std::size_t>(n));
  parallel_for(n, [&](index_t lo, index_t hi) {
    for (index_t i = lo; i < hi; ++i) {
      const double d = K.diagonal(i);
      inv_diag[static_cast<std::size_t>(i)] = d != 0.0 ? 1.0 / d : 0.0;
    }
  });

  const double norm_b = std::sqrt(detail::det_dot(b, b));
  CgResult res;
  if (norm_b == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return res;
  }

  std::vector<double> r(static_cast<std::size_t>(n)),
      z(static_cast<std::size_t>(n)), p(static_cast<std::size_t>(n)),
      Kp(static_cast<std::size_t>(n));
  K.multiply(x, r);
  parallel_for(n, [&](index_t lo, index_t hi) {
    for (index_t i = lo; i < hi; ++i) {
      const auto u = static_cast<std::size_t>(i);
      r[u] = b[u] - r[u];
      z[u] = inv_diag[u] * r[u];
      p[u] = z[u];
    }
  });

  double rz = detail::det_dot(r, z);
  double rel = std::sqrt(detail::det_dot(r, r)) / norm_b;
  std::vector<double> tail;
  for (index_t it = 0; it < max_iter; ++it) {
    if (rel <= tol) {
      res.iterations = it;
      res.rel_residual = rel;
      res.residual_tail = tail;
      return res;
    }
    K.multiply(p, Kp);
    const double pKp = detail::det_dot(p, Kp);
    if (!(pKp > 0.0))
      throw numeric_error(
          "pcg: operator not positive definite (p.Kp = " + format_double(pKp) +
          " at iteration " + std::to_string(it) + ")");
    const double alpha = rz / pKp;
    parallel_for(n, [&](index_t lo, index_t hi) {
      for (index_t i = lo; i < hi; ++i) {
        const auto u = static_cast<std::size_t>(i);
        x[u] += alpha * p[u];
        r[u] -= alpha * Kp[u];
        z[u] = inv_diag[u] * r[u];
      }
    });
    const double rz_new = detail::det_dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    parallel_for(n, [&](index_t lo, index_t hi) {
      for (index_t i = lo; i < hi; ++i) {
        const auto u = static_cast<std::size_t>(i);
        p[u] = z[u] + beta * p[u];
      }
    });
    rel = std::sqrt(detail::det_dot(r, r)) / norm_b;
    tail.push_back(rel);
    if (tail.size() > 8) tail.erase(tail.begin());
  }
  std::string msg = "pcg: no convergence within " + std::to_string(max_iter) +
                    " iterations; residual history:";
  for (double t : tail) msg += " " + format_double(t);
  throw numeric_error(msg);
}

}  // namespace ellreg
