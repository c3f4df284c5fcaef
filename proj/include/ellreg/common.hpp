#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ellreg {

using index_t = std::int64_t;

/// Raised when user-supplied configuration is malformed or inconsistent.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an algorithm fails numerically (non-convergence, loss of
/// positivity, ...) even though the inputs were admissible.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Small fixed-size point/vector in R^N.
template <int N>
struct Vec {
  std::array<double, N> v{};

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }

  Vec operator+(const Vec& o) const {
    Vec r;
    for (int i = 0; i < N; ++i) r.v[i] = v[i] + o.v[i];
    return r;
  }
  Vec operator-(const Vec& o) const {
    Vec r;
    for (int i = 0; i < N; ++i) r.v[i] = v[i] - o.v[i];
    return r;
  }
  Vec operator*(double s) const {
    Vec r;
    for (int i = 0; i < N; ++i) r.v[i] = v[i] * s;
    return r;
  }
  double dot(const Vec& o) const {
    double s = 0;
    for (int i = 0; i < N; ++i) s += v[i] * o.v[i];
    return s;
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

template <int N>
Vec<N> operator*(double s, const Vec<N>& x) {
  return x * s;
}

/// FNV-1a 64-bit hash, used to fingerprint configurations in run metadata.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Shortest round-trip decimal form of a double (%.17g).
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline bool is_power_of_two(index_t m) { return m > 0 && (m & (m - 1)) == 0; }

}  // namespace ellreg
