// Acceptance gate: one binary, one checked criterion per command-line index
// (1..9, or 0 / no argument for the full battery).  Each criterion prints
// exactly one [PASS]/[FAIL] line carrying its measured values, preceded by
// indented detail lines, and the process exits nonzero if any checked
// criterion failed.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <ellreg/ellreg.hpp>

namespace {

using namespace ellreg;
namespace fs = std::filesystem;

int failures = 0;

std::string num(double v) {
  char b[40];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

void note(const std::string& s) { std::printf("    - %s\n", s.c_str()); }

void verdict(int crit, bool ok, const std::string& msg) {
  std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", crit,
              msg.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Stopwatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// ---------------------------------------------------------------- criterion 1

void c1() {
  Stopwatch sw;
  bool ok = true;
  const auto radii = dyadic_radii();
  double worst_exact = 0.0, worst_solved = 0.0;
  for (double L : {1.0, 4.0, 9.0}) {
    const double want = meyers_exponent(1.0, L);
    const Grid<2> g(128);  // node spacing 1/64 = the finest dyadic radius
    const ScalarField<2> u = meyers_solution(1.0, L, g);
    const ExponentReport rep = holder_exponent(u, Vec<2>{}, radii);
    const double err = std::abs(rep.exponent - want);
    worst_exact = std::max(worst_exact, err);
    note("exact (1," + num(L) + "): exponent " + num(rep.exponent) +
         " vs sqrt(lambda/L) = " + num(want) + ", |err| = " + num(err));
    ok = ok && err < 1e-3;
  }
  {
    const double want = meyers_exponent(1.0, 4.0);
    const Grid<2> g(128);
    BoundaryData<2> bd;
    bd.g = [](const Vec<2>& x) { return meyers_value(1.0, 4.0, x); };
    bd.kind = "exact-trace";
    const SolveResult<2> sol =
        solve_dirichlet(meyers_field<2>(1.0, 4.0), g, bd);
    const ExponentReport rep = holder_exponent(sol.u, Vec<2>{}, radii);
    worst_solved = std::abs(rep.exponent - want) / want;
    note("solved m=128 (1,4): exponent " + num(rep.exponent) + " vs " +
         num(want) + ", rel err = " + num(worst_solved));
    ok = ok && worst_solved <= 0.05;
  }
  verdict(1, ok,
          "Holder exponent recovery: exact worst |err| " + num(worst_exact) +
              " (need < 1e-3), solved worst rel err " + num(worst_solved) +
              " (need <= 5%), t = " + num(sw.seconds()) + " s");
}

// ---------------------------------------------------------------- criterion 2

void c2() {
  Stopwatch sw;
  bool ok = true;
  const Grid<2> g(128);
  const MatrixField<2> field = meyers_field<2>(1.0, 4.0);
  const std::vector<double> radii{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const double target = pi * pi;

  const RadialTrace exact =
      acf_product(sector_solutions(1.0, 4.0, 2, g), field, radii);
  double worst_rel = 0.0;
  for (double v : exact.values)
    worst_rel = std::max(worst_rel, std::abs(v / target - 1.0));
  note("exact two-phase product / pi^2 deviates by at most " + num(worst_rel));
  ok = ok && worst_rel <= 0.02;

  const RadialTrace solved = acf_product(
      solved_sector_phases(field, g, 2, 1.0, 4.0), field, radii);
  const MonotonicityReport mon = check_monotone(solved, 0.02);
  note(std::string("solved variant monotone: ") +
       (mon.is_monotone ? "yes" : "no") + ", worst violation " +
       num(mon.worst_violation));
  ok = ok && mon.is_monotone;

  verdict(2, ok,
          "two-phase product = pi^2 within " + num(worst_rel) +
              " (need <= 2%), solved trace monotone at tol 0.02, t = " +
              num(sw.seconds()) + " s");
}

// ---------------------------------------------------------------- criterion 3

void c3() {
  Stopwatch sw;
  bool ok = true;
  double worst_rel = 0.0;
  for (int m : {2, 3, 4}) {
    const double want = sector_exponent(1.0, 4.0, m);
    RadialTrace t;
    t.label = "supnorm";
    for (int j = 0; j <= 6; ++j) {
      const double R = std::pow(2.0, j);
      double sup = 0.0;
      for (int a = 0; a < 4096; ++a) {
        const double th = 2.0 * pi * (a + 0.5) / 4096.0;
        const int i =
            std::min(m, 1 + static_cast<int>(th / (2.0 * pi / m)));
        const Vec<2> x{R * std::cos(th), R * std::sin(th)};
        sup = std::max(sup, std::abs(sector_value(1.0, 4.0, m, i, x)));
      }
      t.radii.push_back(R);
      t.values.push_back(sup);
    }
    const double khat = growth_exponent(t).fit.exponent;
    const double rel = std::abs(khat - want) / want;
    worst_rel = std::max(worst_rel, rel);
    note("m = " + std::to_string(m) + ": fitted " + num(khat) + " vs " +
         num(want) + ", rel err " + num(rel));
    ok = ok && rel <= 0.05;
  }
  verdict(3, ok,
          "sector growth exponents (m/2) sqrt(lambda/L), worst rel err " +
              num(worst_rel) + " (need <= 5%), t = " + num(sw.seconds()) +
              " s");
}

// ---------------------------------------------------------------- criterion 4

void c4() {
  Stopwatch sw;
  bool ok = true;
  double worst_circle = 0.0;
  for (int m = 2; m <= 6; ++m) {
    const PartitionResult res = optimize_partition(1, m);
    const double err = std::abs(res.value - 0.5 * m);
    worst_circle = std::max(worst_circle, err);
    ok = ok && err <= 1e-8;
  }
  note("circle partitions m = 2..6: worst |value - m/2| = " +
       num(worst_circle));

  double worst_hemi = 0.0;
  for (int n : {3, 4}) {
    const double lam = cap_eigenvalue({n, 0.5 * pi}).lambda1;
    const double err = std::abs(lam - (n - 1.0));
    worst_hemi = std::max(worst_hemi, err);
    note("hemisphere eigenvalue, ambient n = " + std::to_string(n) + ": " +
         num(lam) + " (|err| = " + num(err) + ")");
    ok = ok && err <= 1e-6;
  }

  const PartitionResult caps = optimize_partition(2, 2);
  const double cap_err = std::abs(caps.value - std::sqrt(2.0));
  note("two-cap optimum on S^2: " + num(caps.value) + " vs sqrt(2), |err| = " +
       num(cap_err));
  ok = ok && cap_err <= 1e-5;

  verdict(4, ok,
          "partition values: circle within " + num(worst_circle) +
              " (need <= 1e-8), hemisphere within " + num(worst_hemi) +
              " (need <= 1e-6), two-cap within " + num(cap_err) +
              " (need <= 1e-5), t = " + num(sw.seconds()) + " s");
}

// ---------------------------------------------------------------- criterion 5

void c5() {
  Stopwatch sw;
  const Grid<3> g(96);
  const MatrixField<3> field = identity_field<3>();
  const double mu = decay_exponent(1.0, 1.0, 3);
  const std::vector<double> radii{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};

  ScalarField<3> up = sample_on_grid(
      g, [](const Vec<3>& x) { return std::max(x[2], 0.0); }, "decay-pos");
  up.exact_gradient = [](const Vec<3>& x) {
    return x[2] > 0.0 ? Vec<3>{0.0, 0.0, 1.0} : Vec<3>{};
  };
  ScalarField<3> un = sample_on_grid(
      g, [](const Vec<3>& x) { return std::max(-x[2], 0.0); }, "decay-neg");
  un.exact_gradient = [](const Vec<3>& x) {
    return x[2] < 0.0 ? Vec<3>{0.0, 0.0, -1.0} : Vec<3>{};
  };

  bool ok = std::abs(mu - (std::sqrt(2.0) - 0.5)) < 1e-15;
  note("mu(1,1,n=3) = " + num(mu) + " (sqrt(2) - 1/2)");
  for (const ScalarField<3>* u : {&up, &un}) {
    const RadialTrace t = decay_trace(*u, field, radii, mu);
    const MonotonicityReport mon = check_monotone(t, 0.02);
    note(u->tag + ": monotone " + (mon.is_monotone ? "yes" : "no") +
         ", worst violation " + num(mon.worst_violation));
    ok = ok && mon.is_monotone;
  }
  verdict(5, ok,
          "normalized decay traces of the harmonic pair nondecreasing at tol "
          "0.02 with mu = " +
              num(mu) + ", t = " + num(sw.seconds()) + " s");
}

// ---------------------------------------------------------------- criterion 6

void c6() {
  Stopwatch sw;
  bool ok = true;

  const Grid<3> g96(96);
  const FundamentalSolutionField fsI =
      compute_fundamental(identity_field<3>(), g96);

  // Part 1, as stated: 4 pi Gamma(x) |x| within 10% of 1 on the annulus
  // 0.15 <= |x| <= 0.35.
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  const index_t n = g96.num_nodes();
  for (index_t i = 0; i < n; ++i) {
    const double d = g96.node_position(i).norm();
    if (d < 0.15 || d > 0.35) continue;
    const double v = 4.0 * pi * fsI.gamma[i] * d;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const bool id_ok = lo >= 0.9 && hi <= 1.1;
  note("identity case: 4 pi Gamma |x| in [" + num(lo) + ", " + num(hi) +
       "] on 0.15 <= |x| <= 0.35 (need within [0.9, 1.1])");
  if (!id_ok) {
    note("this gap is forced by the geometry, not the grid: the point load "
         "is solved with zero data on the cube [-1,1]^3, and domain "
         "monotonicity against the comparison balls B_1 and B_sqrt(3) pins "
         "4 pi Gamma |x| between 1 - |x| and 1 - |x|/sqrt(3)");
    note("at |x| = 0.35 even the upper envelope is 1 - 0.35/sqrt(3) = " +
         num(1.0 - 0.35 / std::sqrt(3.0)) +
         " < 0.9, so no resolution can meet the 10% band on this annulus");
  }
  ok = ok && id_ok;

  // Part 2: empirical C2/C1 for the radial-anisotropy field is stable in m.
  const Grid<3> g64(64);
  const MatrixField<3> mey = meyers_field<3>(1.0, 4.0);
  const FundamentalSolutionField fsM64 = compute_fundamental(mey, g64);
  const FundamentalSolutionField fsM96 = compute_fundamental(mey, g96);
  const BoundsReport b64 = bounds_ratio(fsM64, 0.25, 0.45);
  const BoundsReport b96 = bounds_ratio(fsM96, 0.25, 0.45);
  const double ratio64 = b64.C2 / b64.C1, ratio96 = b96.C2 / b96.C1;
  const double drift = std::abs(ratio96 / ratio64 - 1.0);
  note("C2/C1 on [0.25, 0.45]: m=64 gives " + num(ratio64) +
       ", m=96 gives " + num(ratio96) + ", drift " + num(drift));
  ok = ok && drift <= 0.15;

  // Part 3: identity-case annulus gradient energy vs the kernel value
  // 1/(12 pi r) over B_{3r/2} \ B_r.
  double worst_ann = 0.0;
  for (double r : {0.2, 0.25, 0.3}) {
    const double e = annulus_gradient_energy(fsI, r);
    const double want = 1.0 / (12.0 * pi * r);
    const double rel = std::abs(e / want - 1.0);
    worst_ann = std::max(worst_ann, rel);
    note("annulus energy at r = " + num(r) + ": " + num(e) + " vs " +
         num(want) + ", rel err " + num(rel));
    ok = ok && rel <= 0.15;
  }

  verdict(6, ok,
          "kernel bounds: identity ratio in [" + num(lo) + ", " + num(hi) +
              "] (need [0.9, 1.1]), C2/C1 drift " + num(drift) +
              " (need <= 15%), annulus energy worst rel err " +
              num(worst_ann) + " (need <= 15%), t = " + num(sw.seconds()) +
              " s");
}

// ---------------------------------------------------------------- criterion 7

void c7() {
  Stopwatch sw;
  bool ok = true;
  const Grid<3> g(96);
  const MatrixField<3> field = meyers_field<3>(1.0, 4.0);
  const FundamentalSolutionField fsM = compute_fundamental(field, g);
  BoundaryData<3> bd;
  bd.g = [](const Vec<3>& x) { return meyers_value_3d(1.0, 4.0, x); };
  bd.kind = "exact-trace";
  const SolveResult<3> sol = solve_dirichlet(field, g, bd);

  RadialTrace t;
  t.label = "weighted-energy";
  for (double r : {0.3, 0.35, 0.4, 0.45, 0.5}) {
    t.radii.push_back(r);
    t.values.push_back(weighted_energy(sol.u, field, fsM.gamma, r));
  }
  const ExponentReport rep = holder_from_decay(t);
  note("fitted alpha = " + num(rep.exponent) + ", fit residual " +
       num(rep.residual));
  ok = ok && rep.exponent > 0.0 && rep.residual < 0.1;

  const double a_half = hole_filling_exponent(0.5);
  const double a_three_q = hole_filling_exponent(0.75);
  note("hole-filling arithmetic: alpha(0.5) = " + num(a_half) +
       ", alpha(0.75) = " + num(a_three_q));
  ok = ok && std::abs(a_half - 0.5) <= 1e-5 &&
       std::abs(a_three_q - 0.20752) <= 1e-5;

  verdict(7, ok,
          "weighted-energy decay: alpha = " + num(rep.exponent) +
              " > 0 with residual " + num(rep.residual) +
              " (need < 0.1); hole-filling exponents match to 1e-5, t = " +
              num(sw.seconds()) + " s");
}

// ---------------------------------------------------------------- criterion 8

void c8() {
  Stopwatch sw;
  bool ok = true;
  const Grid<2> g(256);
  BoundaryData<2> bd;
  bd.g = [](const Vec<2>& x) { return x[0]; };
  bd.kind = "linear";
  const HomogenizationReport rep =
      gconv_experiment(1.0, 4.0, {0.25, 0.125, 0.0625}, bd, g, 0);

  bool decreasing = true;
  for (std::size_t i = 1; i < rep.distances.size(); ++i)
    decreasing = decreasing && rep.distances[i] < rep.distances[i - 1];
  const bool halved = rep.distances.back() < 0.5 * rep.distances.front();
  std::string ds;
  for (std::size_t i = 0; i < rep.distances.size(); ++i)
    ds += (i ? ", " : "") + num(rep.distances[i]);
  note("L2 distances along eps = {1/4, 1/8, 1/16}: {" + ds + "}");
  ok = ok && decreasing && halved;

  const SymTensor<2> oracle = laminate_effective_oracle<2>(1.0, 4.0, 0);
  const double e11 = std::abs(rep.effective(0, 0) / oracle(0, 0) - 1.0);
  const double e22 = std::abs(rep.effective(1, 1) / oracle(1, 1) - 1.0);
  note("effective tensor diag(" + num(rep.effective(0, 0)) + ", " +
       num(rep.effective(1, 1)) + ") vs fine-grid oracle diag(" +
       num(oracle(0, 0)) + ", " + num(oracle(1, 1)) + ")");
  ok = ok && e11 <= 0.01 && e22 <= 0.01 &&
       std::abs(rep.effective(0, 1) - oracle(0, 1)) <= 1e-12;

  verdict(8, ok,
          std::string("laminate limit: distances ") +
              (decreasing ? "strictly decrease" : "do NOT decrease") +
              ", final/initial = " +
              num(rep.distances.back() / rep.distances.front()) +
              " (need < 0.5), effective entries within " +
              num(std::max(e11, e22)) + " of oracle (need <= 1%), t = " +
              num(sw.seconds()) + " s");
}

// ---------------------------------------------------------------- criterion 9

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in.good()) return "<missing " + p.string() + ">";
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int shell(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

void c9() {
  Stopwatch sw;
  bool ok = true;

  // Pointwise form decomposition stays nonnegative up to round-off.
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = std::numeric_limits<double>::infinity();
  const MatrixField<2> f2 = meyers_field<2>(1.0, 4.0);
  const MatrixField<3> f3 = meyers_field<3>(1.0, 4.0);
  for (int s = 0; s < 50000; ++s) {
    Vec<2> x{box(rng), box(rng)};
    if (x.norm() < 1e-4) {
      x[0] = 0.5;
      x[1] = 0.25;
    }
    const Vec<2> xi{gauss(rng), gauss(rng)};
    worst = std::min(worst, form_decomposition_check(f2, x, xi));
  }
  for (int s = 0; s < 50000; ++s) {
    Vec<3> x{box(rng), box(rng), box(rng)};
    if (x.norm() < 1e-4) {
      x[0] = 0.5;
      x[1] = 0.25;
      x[2] = 0.25;
    }
    const Vec<3> xi{gauss(rng), gauss(rng), gauss(rng)};
    worst = std::min(worst, form_decomposition_check(f3, x, xi));
  }
  note("form decomposition: minimum residual over 1e5 samples = " +
       num(worst));
  ok = ok && worst >= -1e-12;

  // Energies are exactly quadratic under scaling of the field values.
  const Grid<2> ge(64);
  const MatrixField<2> field = meyers_field<2>(1.0, 4.0);
  ScalarField<2> u = meyers_solution(1.0, 4.0, ge);
  u.exact_gradient = nullptr;
  const double c = 3.7;
  ScalarField<2> cu = u;
  for (double& v : cu.values) v *= c;
  double worst_cov = 0.0;
  for (double r : {0.3, 0.6, 0.9}) {
    const double e = dirichlet_energy_ball(u, field, r);
    const double ec = dirichlet_energy_ball(cu, field, r);
    worst_cov = std::max(worst_cov,
                         std::abs(ec - c * c * e) / std::abs(c * c * e));
    const double p = gradient_energy_ball(u, Vec<2>{}, r);
    const double pc = gradient_energy_ball(cu, Vec<2>{}, r);
    worst_cov = std::max(worst_cov,
                         std::abs(pc - c * c * p) / std::abs(c * c * p));
  }
  note("scaling covariance: worst relative drift of c^2-scaled energies = " +
       num(worst_cov));
  ok = ok && worst_cov <= 1e-12;

  // CSV outputs are byte-identical across worker counts.
  bool det_ok = false;
#ifdef ELLREG_CLI_PATH
  const fs::path root = "acceptance-out";
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "c9.cfg");
    cfg << "experiment = solve\ngrid.dim = 2\ngrid.m = 64\n"
           "field.kind = meyers\nfield.lambda = 1\nfield.L = 4\n"
           "boundary.kind = exact\n";
  }
  const std::string base = std::string(ELLREG_CLI_PATH) + " run --config " +
                           (root / "c9.cfg").string() + " --quiet --out ";
  const int rc1 =
      shell(base + (root / "t1").string() + " --threads 1 > /dev/null 2>&1");
  const int rc4 =
      shell(base + (root / "t4").string() + " --threads 4 > /dev/null 2>&1");
  det_ok = rc1 == 0 && rc4 == 0;
  for (const char* f :
       {"report.csv", "error.csv", "solution.csv", "solution.elrg",
        "meta.txt"}) {
    const bool same = slurp(root / "t1" / f) == slurp(root / "t4" / f);
    if (!same) note(std::string("output differs across threads: ") + f);
    det_ok = det_ok && same;
  }
  note(std::string("CSV determinism across --threads {1,4}: ") +
       (det_ok ? "byte-identical" : "MISMATCH"));
#else
  note("CSV determinism: CLI path not configured");
#endif
  ok = ok && det_ok;

  verdict(9, ok,
          "property suites: min form residual " + num(worst) +
              " (need >= -1e-12), scaling covariance drift " + num(worst_cov) +
              " (need <= 1e-12), thread-count determinism " +
              (det_ok ? "holds" : "FAILS") + ", t = " + num(sw.seconds()) +
              " s");
}

}  // namespace

int main(int argc, char** argv) {
  int which = 0;
  if (argc > 1) which = std::atoi(argv[1]);
  if (which < 0 || which > 9) {
    std::fprintf(stderr, "usage: %s [criterion 1..9, 0 = all]\n", argv[0]);
    return 2;
  }
  void (*checks[9])() = {c1, c2, c3, c4, c5, c6, c7, c8, c9};
  if (which == 0) {
    for (auto* f : checks) f();
  } else {
    checks[which - 1]();
  }
  if (failures)
    std::printf("%d criterion check(s) failed\n", failures);
  return failures ? 1 : 0;
}
