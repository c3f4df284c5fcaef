#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ellreg/coeff.hpp"
#include "ellreg/config.hpp"
#include "ellreg/csvio.hpp"
#include "ellreg/exact.hpp"
#include "ellreg/fem.hpp"
#include "ellreg/functionals.hpp"
#include "ellreg/fundsol.hpp"
#include "ellreg/parallel.hpp"
#include "ellreg/partitions.hpp"
#include "ellreg/rescale.hpp"

namespace ellreg {

struct RunOptions {
  std::string out_dir;  // overrides config `out` and ELLREG_OUT
  int threads = 1;
  std::uint64_t seed = 12345;  // Monte Carlo ellipticity spot-check
  bool quiet = false;
};

/// What a run produced: its output directory and the one number that
/// summarizes it (used as the sweep aggregate column).
struct RunOutcome {
  std::filesystem::path dir;
  std::string metric;
  double value = 0.0;
};

namespace detail {

inline void say(const RunOptions& opt, const std::string& line) {
  if (!opt.quiet) std::fputs((line + "\n").c_str(), stdout);
}

inline std::string hex_hash(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// meta.txt: enough to re-run the experiment (the full canonical config is
/// embedded) plus the run's deterministic summary values.  No timestamps and
/// no wall-clock data, so identical configs produce identical files.
inline void write_meta(
    const std::filesystem::path& dir, const Config& cfg,
    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::string s;
  s += "config_hash = " + hex_hash(cfg.hash()) + "\n";
  for (const auto& [k, v] : extra) s += k + " = " + v + "\n";
  s += "[config]\n" + cfg.canonical();
  write_text_file(dir / "meta.txt", s);
}

/// Seeded Monte Carlo sanity check: draws random points and directions and
/// verifies the radial/spherical split of the quadratic form is never above
/// the form value (up to roundoff).  Returns the worst residual seen.
template <int N>
double form_split_spot_check(const MatrixField<N>& f, std::uint64_t seed,
                             int samples = 2000) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vec<N> x, xi;
    double r2 = 0.0;
    do {
      r2 = 0.0;
      for (int d = 0; d < N; ++d) {
        x[d] = box(rng);
        r2 += x[d] * x[d];
      }
    } while (r2 < 1e-8);
    for (int d = 0; d < N; ++d) xi[d] = gauss(rng);
    worst = std::min(worst, form_decomposition_check(f, x, xi));
  }
  return worst;
}

template <int N>
MatrixField<N> field_from_config(const Config& cfg,
                                 const std::string& default_kind) {
  const std::string kind = cfg.get_string("field.kind", default_kind);
  const double lambda = cfg.get_double("field.lambda", 1.0);
  const double L = cfg.get_double("field.L", kind == "identity" ? 1.0 : 4.0);
  if (kind == "identity") return identity_field<N>(cfg.get_double("field.scale", 1.0));
  if (kind == "constant") {
    std::vector<double> e = cfg.get_double_list("field.entries", {});
    SymTensor<N> A;
    if (static_cast<int>(e.size()) == N) {
      for (int d = 0; d < N; ++d) A(d, d) = e[static_cast<std::size_t>(d)];
    } else if (static_cast<int>(e.size()) == SymTensor<N>::ncomp) {
      for (int i = 0; i < SymTensor<N>::ncomp; ++i) A.a[static_cast<std::size_t>(i)] = e[static_cast<std::size_t>(i)];
    } else {
      throw config_error(
          "field.entries: expected " + std::to_string(N) + " (diagonal) or " +
          std::to_string(SymTensor<N>::ncomp) +
          " (upper triangle) comma-separated values, got " +
          std::to_string(e.size()));
    }
    return constant_field(A);
  }
  if (kind == "meyers") return meyers_field<N>(lambda, L);
  if (kind == "laminate") {
    const int axis = static_cast<int>(cfg.get_int("field.axis", 1));
    if (axis < 1 || axis > N)
      throw config_error("field.axis: must be in [1, " + std::to_string(N) +
                         "], got " + std::to_string(axis));
    return laminate_field<N>(lambda, L, cfg.get_double("field.eps", 0.25),
                             axis - 1);
  }
  if constexpr (N == 2) {
    if (kind == "checkerboard")
      return checkerboard_field<2>(lambda, L, cfg.get_double("field.eps", 0.25));
    if (kind == "rotated") {
      const std::string a = cfg.get_string("field.angles", "constant");
      AngleField angles;
      if (a == "constant")
        angles = AngleField::constant;
      else if (a == "radial")
        angles = AngleField::radial;
      else if (a == "tangential")
        angles = AngleField::tangential;
      else
        throw config_error(
            "field.angles: expected constant|radial|tangential, got `" + a +
            "`");
      return rotated_field<2>(lambda, L, angles, cfg.get_double("field.angle", 0.0));
    }
  }
  if (kind == "grid-sampled") {
    if (!cfg.has("field.lambda") || !cfg.has("field.L"))
      throw config_error(
          "grid-sampled fields need declared bounds field.lambda and field.L");
    return load_matrix_field_elrg<N>(cfg.require_string("field.file"),
                                     {lambda, L});
  }
  throw config_error(
      "field.kind: unknown kind `" + kind +
      "`; expected identity|constant|meyers|laminate|checkerboard|rotated|"
      "grid-sampled");
}

// Shared whitelist pieces for unknown-key detection.
inline std::vector<std::string> field_keys() {
  return {"field.kind", "field.lambda", "field.L",     "field.eps",
          "field.axis", "field.angle",  "field.angles", "field.entries",
          "field.file", "field.scale"};
}

inline std::vector<std::string> base_keys() {
  return {"experiment", "out", "solver.tol"};
}

inline std::vector<std::string> with(std::vector<std::string> a,
                                     std::initializer_list<const char*> b) {
  for (const char* k : b) a.emplace_back(k);
  return a;
}

inline std::vector<std::string> with(std::vector<std::string> a,
                                     const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

template <int N>
BoundaryData<N> boundary_from_config(const Config& cfg,
                                     const MatrixField<N>& field,
                                     const std::string& default_kind) {
  const std::string kind = cfg.get_string("boundary.kind", default_kind);
  if (kind == "constant")
    return BoundaryData<N>::constant(cfg.get_double("boundary.value", 0.0));
  if (kind == "linear") {
    const int axis = static_cast<int>(cfg.get_int("boundary.axis", 1));
    if (axis < 1 || axis > N)
      throw config_error("boundary.axis: must be in [1, " + std::to_string(N) +
                         "], got " + std::to_string(axis));
    return BoundaryData<N>::expression(
        [axis](const Vec<N>& x) { return x[axis - 1]; });
  }
  if (kind == "exact") {
    if (cfg.get_string("field.kind", "meyers") != "meyers")
      throw config_error(
          "boundary.kind = exact needs field.kind = meyers (the only kind "
          "with a closed-form solution); use linear or constant instead");
    const EllipticityBounds b = field.bounds();
    if constexpr (N == 2)
      return BoundaryData<N>::from_exact([b](const Vec<2>& x) {
        return meyers_value(b.lambda, b.L, x);
      });
    else
      return BoundaryData<N>::from_exact([b](const Vec<3>& x) {
        return meyers_value_3d(b.lambda, b.L, x);
      });
  }
  throw config_error("boundary.kind: unknown kind `" + kind +
                     "`; expected exact|linear|constant");
}

inline std::vector<std::pair<std::string, std::string>> common_meta(
    const Config& cfg, const std::string& experiment, index_t m, int dim,
    double tol, const std::string& field_desc) {
  return {{"experiment", experiment},
          {"grid.m", std::to_string(m)},
          {"grid.dim", std::to_string(dim)},
          {"solver.tol", format_double(tol)},
          {"field", field_desc}};
}

// ---- individual experiments ----------------------------------------------

template <int N>
RunOutcome run_solve_dim(const Config& cfg, const std::filesystem::path& dir,
                         const RunOptions& opt) {
  const index_t m = grid_m_from(cfg, 64);
  const double tol = cfg.get_double("solver.tol", 1e-10);
  const Grid<N> g(m);
  const MatrixField<N> field = field_from_config<N>(cfg, "meyers");
  const BoundaryData<N> bd = boundary_from_config<N>(cfg, field, "exact");

  SolveResult<N> sol = solve_dirichlet(field, g, bd, tol);
  save_field_elrg(dir / "solution.elrg", sol.u);
  if constexpr (N == 2)
    write_text_file(dir / "solution.csv", csv_scalar_field(sol.u));
  write_text_file(dir / "report.csv", csv_solve_report(sol.report));

  auto meta = common_meta(cfg, "solve", m, N, tol, field.describe());
  meta.emplace_back("boundary", bd.kind);
  meta.emplace_back("iterations", std::to_string(sol.report.iterations));
  meta.emplace_back("residual", format_double(sol.report.residual));
  meta.emplace_back("form_split_min",
                    format_double(form_split_spot_check(field, opt.seed)));
  meta.emplace_back("seed", std::to_string(opt.seed));

  RunOutcome out{dir, "residual", sol.report.residual};
  if (bd.kind == "from-exact-solution") {
    const EllipticityBounds b = field.bounds();
    std::function<double(const Vec<N>&)> exact;
    if constexpr (N == 2)
      exact = [b](const Vec<2>& x) { return meyers_value(b.lambda, b.L, x); };
    else
      exact = [b](const Vec<3>& x) {
        return meyers_value_3d(b.lambda, b.L, x);
      };
    const double err = l2_error(sol.u, exact);
    write_text_file(dir / "error.csv",
                    "m,l2_error\n" + std::to_string(m) + "," +
                        format_double(err) + "\n");
    meta.emplace_back("l2_error", format_double(err));
    out = {dir, "l2_error", err};
  }
  write_meta(dir, cfg, meta);
  say(opt, "solve: m=" + std::to_string(m) + " iters=" +
               std::to_string(sol.report.iterations) + " " + out.metric + "=" +
               format_double(out.value) + " (assembly " +
               format_double(sol.report.assembly_ms) + " ms, solve " +
               format_double(sol.report.solve_ms) + " ms)");
  return out;
}

inline RunOutcome run_solve(const Config& cfg, const std::filesystem::path& dir,
                            const RunOptions& opt) {
  const long long dim = cfg.get_int("grid.dim", 2);
  if (dim == 2) return run_solve_dim<2>(cfg, dir, opt);
  if (dim == 3) return run_solve_dim<3>(cfg, dir, opt);
  throw config_error("grid.dim: must be 2 or 3, got " + std::to_string(dim));
}

inline RunOutcome run_acf(const Config& cfg, const std::filesystem::path& dir,
                          const RunOptions& opt) {
  const index_t m = grid_m_from(cfg, 128);
  const double tol = cfg.get_double("solver.tol", 1e-10);
  if (cfg.get_string("field.kind", "meyers") != "meyers")
    throw config_error(
        "field.kind: the phase family is tied to the radial anisotropic "
        "tensor; use field.kind = meyers");
  const MatrixField<2> field = field_from_config<2>(cfg, "meyers");
  const EllipticityBounds b = field.bounds();
  const int phases_m = static_cast<int>(cfg.get_int("phases.m", 2));
  const std::string source = cfg.get_string("phases.source", "exact");
  const std::vector<double> radii = cfg.get_double_list(
      "radii", {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  const double mono_tol = cfg.get_double("monotone.tol", 0.02);

  const Grid<2> g(m);
  std::vector<ScalarField<2>> phases;
  if (source == "exact")
    phases = sector_solutions(b.lambda, b.L, phases_m, g);
  else if (source == "solved")
    phases = solved_sector_phases(field, g, phases_m, b.lambda, b.L, tol);
  else
    throw config_error("phases.source: expected exact|solved, got `" + source +
                       "`");

  const RadialTrace phi = acf_product(phases, field, radii);
  const MonotonicityReport mono = check_monotone(phi, mono_tol);
  write_text_file(dir / "phi.csv", csv_radial_traces({phi}));
  write_text_file(dir / "monotone.csv", csv_monotonicity({{phi.label, mono}}));

  auto meta = common_meta(cfg, "acf", m, 2, tol, field.describe());
  meta.emplace_back("phases.m", std::to_string(phases_m));
  meta.emplace_back("phases.source", source);
  meta.emplace_back("monotone.tol", format_double(mono_tol));
  meta.emplace_back("reference_exponent",
                    format_double(sector_exponent(b.lambda, b.L, phases_m)));
  meta.emplace_back("is_monotone", mono.is_monotone ? "1" : "0");
  meta.emplace_back("seed", std::to_string(opt.seed));
  meta.emplace_back("form_split_min",
                    format_double(form_split_spot_check(field, opt.seed)));
  write_meta(dir, cfg, meta);
  say(opt, "acf: m=" + std::to_string(m) + " phases=" +
               std::to_string(phases_m) + " (" + source + ") worst_violation=" +
               format_double(mono.worst_violation));
  return {dir, "worst_violation", mono.worst_violation};
}

inline RunOutcome run_weighted(const Config& cfg,
                               const std::filesystem::path& dir,
                               const RunOptions& opt) {
  const index_t m = grid_m_from(cfg, 64);
  const double tol = cfg.get_double("solver.tol", 1e-10);
  const MatrixField<3> field = field_from_config<3>(cfg, "meyers");
  const std::vector<double> radii =
      cfg.get_double_list("radii", {0.3, 0.35, 0.4, 0.45, 0.5});
  const Grid<3> g(m);

  const FundamentalSolutionField fs = compute_fundamental(field, g, tol);
  const BoundaryData<3> bd = boundary_from_config<3>(cfg, field, "exact");
  const SolveResult<3> sol = solve_dirichlet(field, g, bd, tol);

  RadialTrace trace;
  trace.label = "weighted";
  trace.radii = radii;
  for (double r : radii)
    trace.values.push_back(weighted_energy(sol.u, field, fs.gamma, r));
  trace.validate();
  const ExponentReport alpha = holder_from_decay(trace);

  write_text_file(dir / "trace.csv", csv_radial_traces({trace}));
  write_text_file(dir / "exponent.csv", csv_exponent(alpha));

  auto meta = common_meta(cfg, "weighted", m, 3, tol, field.describe());
  const EllipticityBounds b = field.bounds();
  meta.emplace_back("alpha", format_double(alpha.exponent));
  meta.emplace_back("fit_residual", format_double(alpha.residual));
  meta.emplace_back("axial_exponent",
                    format_double(axial_exponent_3d(b.lambda, b.L)));
  meta.emplace_back("gamma_negativity", fs.negativity_flag ? "1" : "0");
  meta.emplace_back("seed", std::to_string(opt.seed));
  write_meta(dir, cfg, meta);
  say(opt, "weighted: m=" + std::to_string(m) +
               " alpha=" + format_double(alpha.exponent) +
               " residual=" + format_double(alpha.residual));
  return {dir, "alpha", alpha.exponent};
}

inline RunOutcome run_decay(const Config& cfg, const std::filesystem::path& dir,
                            const RunOptions& opt) {
  const index_t m = grid_m_from(cfg, 64);
  const double tol = cfg.get_double("solver.tol", 1e-10);
  const MatrixField<3> field = field_from_config<3>(cfg, "identity");
  const EllipticityBounds b = field.bounds();
  const double mu = cfg.get_double("decay.mu", decay_exponent(b.lambda, b.L, 3));
  const std::vector<double> radii =
      cfg.get_double_list("radii", {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8});
  const double mono_tol = cfg.get_double("monotone.tol", 0.02);
  const Grid<3> g(m);

  // The two-phase axial test pair: positive and negative parts of x_3.
  auto make_phase = [&](double sign, const std::string& tag) {
    ScalarField<3> u = sample_on_grid(
        g, [sign](const Vec<3>& x) { return std::max(sign * x[2], 0.0); },
        tag);
    u.exact_gradient = [sign](const Vec<3>& x) -> Vec<3> {
      return sign * x[2] > 0.0 ? Vec<3>{0.0, 0.0, sign} : Vec<3>{};
    };
    return u;
  };
  const ScalarField<3> up = make_phase(1.0, "phase-pos");
  const ScalarField<3> un = make_phase(-1.0, "phase-neg");

  RadialTrace tp = decay_trace(up, field, radii, mu);
  tp.label = "decay-pos";
  RadialTrace tn = decay_trace(un, field, radii, mu);
  tn.label = "decay-neg";
  const MonotonicityReport mp = check_monotone(tp, mono_tol);
  const MonotonicityReport mn = check_monotone(tn, mono_tol);

  write_text_file(dir / "decay.csv", csv_radial_traces({tp, tn}));
  write_text_file(dir / "monotone.csv",
                  csv_monotonicity({{tp.label, mp}, {tn.label, mn}}));

  const double worst = std::min(mp.worst_violation, mn.worst_violation);
  auto meta = common_meta(cfg, "decay", m, 3, tol, field.describe());
  meta.emplace_back("mu", format_double(mu));
  meta.emplace_back("monotone.tol", format_double(mono_tol));
  meta.emplace_back("is_monotone", (mp.is_monotone && mn.is_monotone) ? "1" : "0");
  meta.emplace_back("seed", std::to_string(opt.seed));
  write_meta(dir, cfg, meta);
  say(opt, "decay: m=" + std::to_string(m) + " mu=" + format_double(mu) +
               " worst_violation=" + format_double(worst));
  return {dir, "worst_violation", worst};
}

inline RunOutcome run_partition(const Config& cfg,
                                const std::filesystem::path& dir,
                                const RunOptions& opt) {
  const std::string geometry = cfg.get_string("partition.geometry", "circle");
  PartitionResult res;
  std::string caps_table;
  if (geometry == "circle") {
    const int m = static_cast<int>(cfg.get_int("partition.m", 2));
    if (m < 2 || m > 16)
      throw config_error("partition.m: must be in [2, 16], got " +
                         std::to_string(m));
    res = optimize_partition(1, m);
  } else if (geometry == "caps") {
    const int n = static_cast<int>(cfg.get_int("partition.n", 3));
    if (n < 3 || n > 4)
      throw config_error("partition.n: ambient dimension must be 3 or 4, got " +
                         std::to_string(n));
    res = optimize_partition(n - 1, 2);
    caps_table = "theta0,lambda1,residual\n";
    for (int k = 1; k <= 15; ++k) {
      const double th = pi * k / 16.0;
      const EigReport eig = cap_eigenvalue({n, th});
      caps_table += format_double(th) + "," + format_double(eig.lambda1) +
                    "," + format_double(eig.residual) + "\n";
    }
  } else {
    throw config_error("partition.geometry: expected circle|caps, got `" +
                       geometry + "`");
  }

  write_text_file(dir / "partition.csv", csv_partition(res));
  if (!caps_table.empty()) write_text_file(dir / "caps.csv", caps_table);

  std::vector<std::pair<std::string, std::string>> meta = {
      {"experiment", "partition"},
      {"geometry", geometry},
      {"value", format_double(res.value)},
      {"iterations", std::to_string(res.iterations)}};
  if (geometry == "caps")
    meta.emplace_back("theta0", format_double(res.spec.theta0));
  write_meta(dir, cfg, meta);
  say(opt, "partition: " + geometry + " value=" + format_double(res.value));
  return {dir, "value", res.value};
}

inline RunOutcome run_fundsol(const Config& cfg,
                              const std::filesystem::path& dir,
                              const RunOptions& opt) {
  const index_t m = grid_m_from(cfg, 64);
  const double tol = cfg.get_double("solver.tol", 1e-10);
  const MatrixField<3> field = field_from_config<3>(cfg, "identity");
  const Grid<3> g(m);
  const double r_in =
      cfg.get_double("annulus.r_in", std::max(0.15, 8.0 * g.h()));
  const double r_out = cfg.get_double("annulus.r_out", 0.35);

  // Each energy annulus [r, 3r/2] must hold 8 node spacings and stay inside
  // the half-cube, so r is feasible only in [8h, 1/3].
  const double r_lo = 8.0 * g.h();
  constexpr double r_hi = 1.0 / 3.0;
  std::vector<double> radii = cfg.get_double_list("radii", {0.2, 0.25, 0.3});
  if (cfg.has("radii")) {
    for (double r : radii)
      if (r < r_lo || r > r_hi)
        throw config_error("radii: annulus radius " + format_double(r) +
                           " outside [8h, 1/3] = [" + format_double(r_lo) +
                           ", " + format_double(r_hi) + "] at grid.m = " +
                           std::to_string(m));
  } else {
    std::erase_if(radii, [&](double r) { return r < r_lo || r > r_hi; });
    if (radii.empty())
      throw config_error(
          "grid.m: too coarse for the default annulus radii {0.2, 0.25, "
          "0.3}; refine the grid or supply `radii` inside [8h, 1/3]");
  }

  const FundamentalSolutionField fs = compute_fundamental(field, g, tol);
  const BoundsReport bounds = bounds_ratio(fs, r_in, r_out);

  RadialTrace energy;
  energy.label = "annulus-energy";
  energy.radii = radii;
  for (double r : radii)
    energy.values.push_back(annulus_gradient_energy(fs, r));
  energy.validate();

  save_field_elrg(dir / "gamma.elrg", fs.gamma);
  write_text_file(dir / "bounds.csv", csv_bounds(bounds));
  write_text_file(dir / "annulus.csv", csv_radial_traces({energy}));

  const double ratio = bounds.C2 / bounds.C1;
  auto meta = common_meta(cfg, "fundsol", m, 3, tol, field.describe());
  meta.emplace_back("C1", format_double(bounds.C1));
  meta.emplace_back("C2", format_double(bounds.C2));
  meta.emplace_back("ratio", format_double(ratio));
  meta.emplace_back("negativity_flag", fs.negativity_flag ? "1" : "0");
  meta.emplace_back("min_annulus_value", format_double(fs.min_annulus_value));
  meta.emplace_back("core_radius", format_double(fs.core_radius));
  meta.emplace_back("seed", std::to_string(opt.seed));
  write_meta(dir, cfg, meta);
  say(opt, "fundsol: m=" + std::to_string(m) + " C1=" +
               format_double(bounds.C1) + " C2=" + format_double(bounds.C2) +
               " ratio=" + format_double(ratio));
  return {dir, "ratio", ratio};
}

inline RunOutcome run_homogenize(const Config& cfg,
                                 const std::filesystem::path& dir,
                                 const RunOptions& opt) {
  const index_t m = grid_m_from(cfg, 256);
  const double tol = cfg.get_double("solver.tol", 1e-10);
  if (cfg.get_string("field.kind", "laminate") != "laminate")
    throw config_error(
        "field.kind: the resolvent-distance experiment is defined for "
        "field.kind = laminate");
  const double lambda = cfg.get_double("field.lambda", 1.0);
  const double L = cfg.get_double("field.L", 4.0);
  const int axis = static_cast<int>(cfg.get_int("field.axis", 1));
  if (axis < 1 || axis > 2)
    throw config_error("field.axis: must be 1 or 2, got " +
                       std::to_string(axis));
  const std::vector<double> eps_list =
      cfg.get_double_list("homogenize.eps", {0.25, 0.125, 0.0625});
  const Grid<2> g(m);
  const BoundaryData<2> bd = boundary_from_config<2>(
      cfg, laminate_field<2>(lambda, L, eps_list.front(), axis - 1), "linear");

  const HomogenizationReport rep =
      gconv_experiment(lambda, L, eps_list, bd, g, axis - 1, tol);
  const SymTensor<2> oracle = laminate_effective_oracle<2>(lambda, L, axis - 1);

  write_text_file(dir / "gconv.csv", csv_homogenization(rep));
  write_text_file(
      dir / "effective.csv",
      "a11,a22,a12,oracle_a11,oracle_a22,oracle_a12\n" +
          format_double(rep.effective(0, 0)) + "," +
          format_double(rep.effective(1, 1)) + "," +
          format_double(rep.effective(0, 1)) + "," +
          format_double(oracle(0, 0)) + "," + format_double(oracle(1, 1)) +
          "," + format_double(oracle(0, 1)) + "\n");

  auto meta = common_meta(
      cfg, "homogenize", m, 2, tol,
      "laminate(lambda=" + format_double(lambda) + ", L=" + format_double(L) +
          ", axis=" + std::to_string(axis) + ")");
  meta.emplace_back("final_distance", format_double(rep.distances.back()));
  meta.emplace_back("effective",
                    format_double(rep.effective(0, 0)) + "," +
                        format_double(rep.effective(1, 1)));
  meta.emplace_back("seed", std::to_string(opt.seed));
  write_meta(dir, cfg, meta);
  say(opt, "homogenize: m=" + std::to_string(m) + " final_distance=" +
               format_double(rep.distances.back()));
  return {dir, "final_distance", rep.distances.back()};
}

inline RunOutcome run_growth(const Config& cfg,
                             const std::filesystem::path& dir,
                             const RunOptions& opt) {
  if (cfg.get_string("field.kind", "meyers") != "meyers")
    throw config_error(
        "field.kind: growth measurement uses the sector family; use "
        "field.kind = meyers");
  const double lambda = cfg.get_double("field.lambda", 1.0);
  const double L = cfg.get_double("field.L", 4.0);
  const int phases_m = static_cast<int>(cfg.get_int("phases.m", 2));
  if (phases_m < 2 || phases_m > 8)
    throw config_error("phases.m: must be in [2, 8], got " +
                       std::to_string(phases_m));
  const int j_max = static_cast<int>(cfg.get_int("growth.levels", 6));
  if (j_max < 3 || j_max > 12)
    throw config_error("growth.levels: must be in [3, 12], got " +
                       std::to_string(j_max));

  // Sup-norms of the sector family over dyadic balls, sampled densely in
  // angle at the ball boundary (the radial profile is increasing, so the
  // sup over the ball is attained there).
  RadialTrace sup;
  sup.label = "supnorm";
  constexpr int samples = 4096;
  for (int j = 0; j <= j_max; ++j) {
    const double R = std::pow(2.0, j);
    double v = 0.0;
    for (int t = 0; t < samples; ++t) {
      const double th = 2.0 * pi * (t + 0.5) / samples;
      const Vec<2> x{R * std::cos(th), R * std::sin(th)};
      const int i =
          std::min(phases_m, 1 + static_cast<int>(th / (2.0 * pi / phases_m)));
      v = std::max(v, sector_value(lambda, L, phases_m, i, x));
    }
    sup.radii.push_back(R);
    sup.values.push_back(v);
  }
  const GrowthReport rep = growth_exponent(sup);

  write_text_file(dir / "supnorm.csv", csv_radial_traces({sup}));
  write_text_file(dir / "exponent.csv", csv_exponent(rep.fit));

  const double reference = sector_exponent(lambda, L, phases_m);
  std::vector<std::pair<std::string, std::string>> meta = {
      {"experiment", "growth"},
      {"phases.m", std::to_string(phases_m)},
      {"field", "meyers(lambda=" + format_double(lambda) +
                    ", L=" + format_double(L) + ")"},
      {"exponent", format_double(rep.fit.exponent)},
      {"reference_exponent", format_double(reference)}};
  write_meta(dir, cfg, meta);
  say(opt, "growth: m=" + std::to_string(phases_m) + " exponent=" +
               format_double(rep.fit.exponent) + " (reference " +
               format_double(reference) + ")");
  return {dir, "exponent", rep.fit.exponent};
}

inline RunOutcome run_probe(const Config& cfg, const std::filesystem::path& dir,
                            const RunOptions& opt) {
  const MatrixField<2> field = field_from_config<2>(cfg, "meyers");
  const EllipticityBounds b = field.bounds();
  const std::string kind = cfg.get_string("field.kind", "meyers");
  const std::string mode = cfg.get_string("probe.mode", "iterate");

  ProbeOptions popts;
  if (mode == "iterate")
    popts.mode = ProbeOptions::Mode::iterate;
  else if (mode == "sector")
    popts.mode = ProbeOptions::Mode::sector;
  else
    throw config_error("probe.mode: expected iterate|sector, got `" + mode +
                       "`");
  popts.sectors = static_cast<int>(cfg.get_int("probe.sectors", 2));
  popts.grid_m = grid_m_from(cfg, 128);
  popts.levels = static_cast<int>(cfg.get_int("probe.levels", 7));
  popts.tol = cfg.get_double("solver.tol", 1e-10);
  if (popts.levels < 3 || popts.levels > 12)
    throw config_error("probe.levels: must be in [3, 12], got " +
                       std::to_string(popts.levels));

  double gamma_default = 1.0;
  if (kind == "meyers") gamma_default = meyers_exponent(b.lambda, b.L);
  const double gamma = cfg.get_double("probe.gamma", gamma_default);

  const ProbeReport rep = liouville_probe(field, gamma, popts);

  write_text_file(dir / "probe.csv", csv_probe(rep));
  write_text_file(dir / "exponent.csv", csv_exponent(rep.fit));

  auto meta = common_meta(cfg, "probe", popts.grid_m, 2, popts.tol,
                          field.describe());
  meta.emplace_back("probe.mode", mode);
  meta.emplace_back("gamma_hat", format_double(rep.gamma_hat));
  meta.emplace_back("reference", format_double(rep.reference));
  meta.emplace_back("verdict", rep.verdict);
  meta.emplace_back("seed", std::to_string(opt.seed));
  write_meta(dir, cfg, meta);
  say(opt, "probe: mode=" + mode + " gamma_hat=" +
               format_double(rep.gamma_hat) + " (" + rep.verdict + ")");
  return {dir, "gamma_hat", rep.gamma_hat};
}

inline void check_keys_for(const Config& cfg, const std::string& experiment) {
  using V = std::vector<std::string>;
  const V base = base_keys();
  const V field = field_keys();
  V known;
  if (experiment == "solve")
    known = with(with(base, field),
                 {"grid.dim", "grid.m", "boundary.kind", "boundary.value",
                  "boundary.axis"});
  else if (experiment == "acf")
    known = with(with(base, field),
                 {"grid.m", "phases.m", "phases.source", "radii",
                  "monotone.tol"});
  else if (experiment == "weighted")
    known = with(with(base, field), {"grid.m", "radii", "boundary.kind"});
  else if (experiment == "decay")
    known = with(with(base, field),
                 {"grid.m", "radii", "decay.mu", "monotone.tol"});
  else if (experiment == "partition")
    known = with(base, {"partition.geometry", "partition.m", "partition.n"});
  else if (experiment == "fundsol")
    known = with(with(base, field),
                 {"grid.m", "annulus.r_in", "annulus.r_out", "radii"});
  else if (experiment == "homogenize")
    known = with(with(base, field),
                 {"grid.m", "homogenize.eps", "boundary.kind", "boundary.axis",
                  "boundary.value"});
  else if (experiment == "growth")
    known = with(with(base, field), {"phases.m", "growth.levels"});
  else if (experiment == "probe")
    known = with(with(base, field),
                 {"grid.m", "probe.mode", "probe.sectors", "probe.levels",
                  "probe.gamma"});
  else
    throw config_error(
        "experiment: unknown name `" + experiment +
        "`; expected one of solve, acf, weighted, decay, partition, fundsol, "
        "homogenize, growth, probe");
  cfg.check_known_keys(known);
}

}  // namespace detail

/// Resolves the output directory: --out flag, then the config's `out` key,
/// then $ELLREG_OUT, then ./ellreg-out.
inline std::filesystem::path resolve_out_dir(const Config& cfg,
                                             const RunOptions& opt) {
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (cfg.has("out")) return cfg.require_string("out");
  if (const char* env = std::getenv("ELLREG_OUT"); env && *env) return env;
  return "ellreg-out";
}

/// Runs one experiment from an already-parsed config into `dir`.
inline RunOutcome run_config(const Config& cfg,
                             const std::filesystem::path& dir,
                             const RunOptions& opt) {
  set_threads(opt.threads);
  const std::string experiment = cfg.require_string("experiment");
  detail::check_keys_for(cfg, experiment);
  std::filesystem::create_directories(dir);
  if (experiment == "solve") return detail::run_solve(cfg, dir, opt);
  if (experiment == "acf") return detail::run_acf(cfg, dir, opt);
  if (experiment == "weighted") return detail::run_weighted(cfg, dir, opt);
  if (experiment == "decay") return detail::run_decay(cfg, dir, opt);
  if (experiment == "partition") return detail::run_partition(cfg, dir, opt);
  if (experiment == "fundsol") return detail::run_fundsol(cfg, dir, opt);
  if (experiment == "homogenize") return detail::run_homogenize(cfg, dir, opt);
  if (experiment == "growth") return detail::run_growth(cfg, dir, opt);
  if (experiment == "probe") return detail::run_probe(cfg, dir, opt);
  throw config_error("experiment: unknown name `" + experiment + "`");
}

inline RunOutcome run_file(const std::filesystem::path& config_path,
                           const RunOptions& opt) {
  const Config cfg = Config::parse_file(config_path);
  return run_config(cfg, resolve_out_dir(cfg, opt), opt);
}

/// Runs the experiment once per parameter value into suffixed directories
/// and writes sweep.csv with one headline row per value.
inline std::vector<RunOutcome> run_sweep(
    const std::filesystem::path& config_path, const std::string& parameter,
    const std::vector<std::string>& values, const RunOptions& opt) {
  if (values.empty())
    throw config_error("sweep: empty value list for parameter `" + parameter +
                       "`");
  const Config base = Config::parse_file(config_path);
  const std::filesystem::path root = resolve_out_dir(base, opt);
  std::filesystem::create_directories(root);

  std::vector<RunOutcome> outcomes;
  std::string aggregate = "parameter,value,metric,result\n";
  for (const std::string& v : values) {
    Config cfg = base;
    cfg.set(parameter, v);
    std::string leaf = parameter + "=" + v;
    for (char& c : leaf)
      if (c == '/' || c == '\\') c = '_';
    const RunOutcome out = run_config(cfg, root / leaf, opt);
    aggregate += parameter + "," + v + "," + out.metric + "," +
                 format_double(out.value) + "\n";
    outcomes.push_back(out);
  }
  write_text_file(root / "sweep.csv", aggregate);
  return outcomes;
}

}  // namespace ellreg
