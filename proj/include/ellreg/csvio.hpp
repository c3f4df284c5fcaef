#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ellreg/coeff.hpp"
#include "ellreg/common.hpp"
#include "ellreg/fem.hpp"
#include "ellreg/functionals.hpp"
#include "ellreg/fundsol.hpp"
#include "ellreg/grid.hpp"
#include "ellreg/partitions.hpp"
#include "ellreg/rescale.hpp"

namespace ellreg {

// All CSV output: '.' decimal separator, 17 significant digits, LF endings.

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  std::ofstream out(path, std::ios::binary);  // binary: keep LF on all hosts
  if (!out)
    throw config_error("cannot open output file " + path.string());
  out << content;
  if (!out) throw config_error("failed writing " + path.string());
}

inline std::string csv_radial_traces(const std::vector<RadialTrace>& traces) {
  std::string s = "radius,value,label\n";
  for (const auto& t : traces)
    for (std::size_t i = 0; i < t.radii.size(); ++i)
      s += format_double(t.radii[i]) + "," + format_double(t.values[i]) + "," +
           t.label + "\n";
  return s;
}

inline std::string csv_exponent(const ExponentReport& r) {
  return "exponent,residual,r_min,r_max\n" + format_double(r.exponent) + "," +
         format_double(r.residual) + "," + format_double(r.r_min) + "," +
         format_double(r.r_max) + "\n";
}

inline std::string csv_monotonicity(
    const std::vector<std::pair<std::string, MonotonicityReport>>& reports) {
  std::string s = "label,is_monotone,worst_violation,r_lo,r_hi\n";
  for (const auto& [label, r] : reports)
    s += label + "," + (r.is_monotone ? "1" : "0") + "," +
         format_double(r.worst_violation) + "," + format_double(r.r_lo) + "," +
         format_double(r.r_hi) + "\n";
  return s;
}

inline std::string csv_bounds(const BoundsReport& r) {
  return "C1,C2,r_in,r_out,m\n" + format_double(r.C1) + "," +
         format_double(r.C2) + "," + format_double(r.r_in) + "," +
         format_double(r.r_out) + "," + std::to_string(r.m) + "\n";
}

// Timings are deliberately absent: CSV outputs must be bitwise reproducible
// across runs and worker counts, and wall-clock times are not.  Timings go
// to stdout instead.
inline std::string csv_solve_report(const SolveReport& r) {
  return "iters,residual,max_principle_delta\n" + std::to_string(r.iterations) +
         "," + format_double(r.residual) + "," +
         format_double(r.max_principle_delta) + "\n";
}

inline std::string csv_homogenization(const HomogenizationReport& r) {
  std::string s = "eps,l2_distance\n";
  for (std::size_t i = 0; i < r.eps.size(); ++i)
    s += format_double(r.eps[i]) + "," + format_double(r.distances[i]) + "\n";
  return s;
}

inline std::string csv_probe(const ProbeReport& r) {
  std::string s = "scale,supnorm,theta\n";
  for (std::size_t i = 0; i < r.scales.size(); ++i)
    s += format_double(r.scales[i]) + "," + format_double(r.supnorms[i]) + "," +
         (i < r.theta.size() ? format_double(r.theta[i]) : "0") + "\n";
  return s;
}

template <int N>
std::string csv_scalar_field(const ScalarField<N>& f) {
  std::string s = N == 2 ? "x,y,value\n" : "x,y,z,value\n";
  const index_t n = f.grid.num_nodes();
  for (index_t i = 0; i < n; ++i) {
    const Vec<N> x = f.grid.node_position(i);
    for (int d = 0; d < N; ++d) s += format_double(x[d]) + ",";
    s += format_double(f[i]) + "\n";
  }
  return s;
}

inline std::string csv_partition(const PartitionResult& r) {
  std::string s = "m,value,lengths...\n";
  if (r.spec.kind == PartitionSpec::Kind::circle) {
    s += std::to_string(r.spec.lengths.size()) + "," + format_double(r.value);
    for (double l : r.spec.lengths) s += "," + format_double(l);
  } else {
    s += "2," + format_double(r.value) + "," + format_double(r.spec.theta0) +
         "," + format_double(pi - r.spec.theta0);
  }
  return s + "\n";
}

// ---- binary nodal/cell array format -------------------------------------
// 16-byte header: magic "ELRG", uint32 dimension, uint32 m (cells per side),
// uint32 component count; then float64 values, row-major, native (little)
// endianness.  Scalar fields store (m+1)^dim nodal values (ncomp = 1);
// coefficient fields store m^dim cell tensors (ncomp = dim(dim+1)/2).

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  s.append(b, 4);
}

struct ElrgHeader {
  std::uint32_t dim = 0, m = 0, ncomp = 0;
};

inline ElrgHeader read_elrg_header(std::ifstream& in,
                                   const std::string& path) {
  char magic[4];
  ElrgHeader h;
  if (!in.read(magic, 4) || std::memcmp(magic, "ELRG", 4) != 0)
    throw config_error("not an ELRG file (bad magic): " + path);
  if (!in.read(reinterpret_cast<char*>(&h.dim), 4) ||
      !in.read(reinterpret_cast<char*>(&h.m), 4) ||
      !in.read(reinterpret_cast<char*>(&h.ncomp), 4))
    throw config_error("truncated ELRG header: " + path);
  return h;
}

}  // namespace detail

template <int N>
void save_field_elrg(const std::filesystem::path& path,
                     const ScalarField<N>& f) {
  std::string s = "ELRG";
  detail::put_u32(s, static_cast<std::uint32_t>(N));
  detail::put_u32(s, static_cast<std::uint32_t>(f.grid.m));
  detail::put_u32(s, 1);
  s.append(reinterpret_cast<const char*>(f.values.data()),
           f.values.size() * sizeof(double));
  write_text_file(path, s);
}

template <int N>
ScalarField<N> load_field_elrg(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open " + path.string());
  const auto h = detail::read_elrg_header(in, path.string());
  if (h.dim != static_cast<std::uint32_t>(N))
    throw config_error("ELRG dimension " + std::to_string(h.dim) +
                       " does not match expected " + std::to_string(N) + ": " +
                       path.string());
  if (h.ncomp != 1)
    throw config_error("ELRG component count " + std::to_string(h.ncomp) +
                       " is not scalar: " + path.string());
  ScalarField<N> f(Grid<N>(static_cast<index_t>(h.m)));
  if (!in.read(reinterpret_cast<char*>(f.values.data()),
               static_cast<std::streamsize>(f.values.size() * sizeof(double))))
    throw config_error("truncated ELRG payload: " + path.string());
  return f;
}

template <int N>
void save_matrix_field_elrg(const std::filesystem::path& path,
                            const Grid<N>& g,
                            const std::vector<SymTensor<N>>& cells) {
  std::string s = "ELRG";
  detail::put_u32(s, static_cast<std::uint32_t>(N));
  detail::put_u32(s, static_cast<std::uint32_t>(g.m));
  detail::put_u32(s, static_cast<std::uint32_t>(SymTensor<N>::ncomp));
  for (const auto& t : cells)
    s.append(reinterpret_cast<const char*>(t.a.data()),
             t.a.size() * sizeof(double));
  write_text_file(path, s);
}

template <int N>
MatrixField<N> load_matrix_field_elrg(const std::filesystem::path& path,
                                      EllipticityBounds declared) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open " + path.string());
  const auto h = detail::read_elrg_header(in, path.string());
  if (h.dim != static_cast<std::uint32_t>(N))
    throw config_error("ELRG dimension " + std::to_string(h.dim) +
                       " does not match expected " + std::to_string(N) + ": " +
                       path.string());
  if (h.ncomp != static_cast<std::uint32_t>(SymTensor<N>::ncomp))
    throw config_error("ELRG component count " + std::to_string(h.ncomp) +
                       " does not match a symmetric tensor in dimension " +
                       std::to_string(N) + ": " + path.string());
  Grid<N> g(static_cast<index_t>(h.m));
  std::vector<SymTensor<N>> cells(static_cast<std::size_t>(g.num_cells()));
  for (auto& t : cells)
    if (!in.read(reinterpret_cast<char*>(t.a.data()),
                 static_cast<std::streamsize>(t.a.size() * sizeof(double))))
      throw config_error("truncated ELRG payload: " + path.string());
  return grid_sampled_field(g, std::move(cells), declared);
}

}  // namespace ellreg
