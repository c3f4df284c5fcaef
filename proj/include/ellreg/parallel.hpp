#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "ellreg/common.hpp"

namespace ellreg {

/// Worker count used by parallel_for / chunked_sum.  Set once from the CLI
/// (--threads); defaults to 1 so library use is serial unless asked.
inline int& thread_count() {
  static int n = 1;
  return n;
}

inline void set_threads(int n) { thread_count() = std::max(1, n); }

/// Runs fn(begin, end) over a partition of [0, n).  Writes made by different
/// ranges must be disjoint; no return values are combined, so the partition
/// (which depends on the worker count) cannot affect results.
template <class Fn>
void parallel_for(index_t n, Fn&& fn) {
  const int workers = thread_count();
  if (workers <= 1 || n < 4096) {
    fn(index_t{0}, n);
    return;
  }
  const int t = static_cast<int>(std::min<index_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(t - 1);
  const index_t step = (n + t - 1) / t;
  for (int w = 1; w < t; ++w) {
    const index_t b = std::min<index_t>(w * step, n);
    const index_t e = std::min<index_t>(b + step, n);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(index_t{0}, std::min<index_t>(step, n));
  for (auto& th : pool) th.join();
}

/// Deterministic parallel reduction: [0, n) is cut into fixed-size chunks
/// (independent of the worker count), each chunk is reduced privately, and
/// the per-chunk partials are summed in chunk order.  Results are therefore
/// bitwise identical for any --threads value.
template <class Fn>
double chunked_sum(index_t n, Fn&& fn, index_t chunk = 16384) {
  if (n <= 0) return 0.0;
  const index_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
  parallel_for(nchunks, [&](index_t cb, index_t ce) {
    for (index_t c = cb; c < ce; ++c) {
      const index_t b = c * chunk;
      const index_t e = std::min(b + chunk, n);
      double s = 0.0;
      for (index_t i = b; i < e; ++i) s += fn(i);
      partial[static_cast<std::size_t>(c)] = s;
    }
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace ellreg
