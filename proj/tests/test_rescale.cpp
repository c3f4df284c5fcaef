#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ellreg/exact.hpp"
#include "ellreg/functionals.hpp"
#include "ellreg/rescale.hpp"

using namespace ellreg;

TEST_CASE("zooming into a homogeneous solution reproduces it") {
  const Grid<2> g(64);
  const ScalarField<2> u = meyers_solution(1.0, 4.0, g);
  const double k = meyers_exponent(1.0, 4.0);

  BlowupSpec<2> spec;
  spec.x0 = Vec<2>{};
  spec.r = 0.5;
  spec.alpha = k;
  spec.normalization = 1.0;
  const ScalarField<2> zoom = blowup_rescale(u, spec, g);

  // Pullback points x0 + r y land on nodes exactly when both indices are
  // even; there r^k-homogeneity makes the zoom reproduce u to rounding.
  // Odd indices sample mid-cell, where multilinear interpolation of the
  // r^{k-1} x2 profile is short by ((h/2)^k - h^k/2) / r^k at the first
  // ring around the pole, and less everywhere else.
  const double h = g.h();
  double sup = 0.0, worst_on = 0.0, worst_off = 0.0;
  for (index_t i = 0; i < g.num_nodes(); ++i) {
    sup = std::max(sup, std::abs(u[i]));
    const Vec<2> p = g.node_position(i);
    bool even = true;
    for (int d = 0; d < 2; ++d)
      even = even && std::llround((p[d] + 1.0) / h) % 2 == 0;
    const double diff = std::abs(zoom[i] - u[i]);
    (even ? worst_on : worst_off) = std::max(even ? worst_on : worst_off, diff);
  }
  CHECK(worst_on < 1e-12 * sup);
  const double deficit =
      (std::pow(0.5 * h, k) - 0.5 * std::pow(h, k)) / std::pow(spec.r, k);
  CHECK(worst_off <= deficit * (1.0 + 1e-10));
  CHECK(worst_off > 0.5 * deficit);
}

TEST_CASE("energy-normalized zoom has unit energy density") {
  const Grid<2> g(64);
  ScalarField<2> u = meyers_solution(1.0, 4.0, g);
  const double k = meyers_exponent(1.0, 4.0);
  const double r = 0.25;
  // self-consistent normalization: the same nodal quadrature the zoomed
  // field will be measured with
  u.exact_gradient = nullptr;
  const double D = std::pow(r, -2.0 * k) * gradient_energy_ball(u, Vec<2>{}, r);
  REQUIRE(D > 0.0);

  BlowupSpec<2> spec;
  spec.x0 = Vec<2>{};
  spec.r = r;
  spec.alpha = k;
  spec.normalization = std::sqrt(D);
  ScalarField<2> zoom = blowup_rescale(u, spec, g);
  zoom.exact_gradient = nullptr;
  const double D_zoom = gradient_energy_ball(zoom, Vec<2>{}, 1.0);
  CHECK(D_zoom == Catch::Approx(1.0).epsilon(0.02));
}

TEST_CASE("zoom preconditions catch degenerate and escaping specs") {
  const Grid<2> g(16);
  const ScalarField<2> u = meyers_solution(1.0, 4.0, g);
  BlowupSpec<2> spec;
  spec.r = 0.5;
  spec.alpha = 0.5;
  spec.normalization = 0.0;
  CHECK_THROWS_AS(blowup_rescale(u, spec, g), std::invalid_argument);
  spec.normalization = 1.0;
  spec.x0 = Vec<2>{0.9, 0.0};  // 0.9 + 0.5 > 1: image leaves the domain
  CHECK_THROWS_AS(blowup_rescale(u, spec, g), std::invalid_argument);
}

TEST_CASE("normalizer of exact power growth is identically one") {
  RadialTrace t;
  t.label = "supnorm";
  for (int j = 0; j <= 5; ++j) {
    t.radii.push_back(std::pow(2.0, j));
    t.values.push_back(std::pow(2.0, 0.75 * j));
  }
  const auto theta = blowdown_normalizer(t, 0.75);
  REQUIRE(theta.size() == t.radii.size());
  for (double v : theta) CHECK(v == Catch::Approx(1.0).margin(1e-12));
  // theta is a running tail sup, hence nonincreasing in the radius index
  for (std::size_t i = 1; i < theta.size(); ++i)
    CHECK(theta[i] <= theta[i - 1] + 1e-15);
}

TEST_CASE("laminate effective tensor: closed form vs quadrature oracle") {
  const SymTensor<2> eff = homogenize_laminate<2>(1.0, 4.0, 0);
  CHECK(eff(0, 0) == Catch::Approx(1.6).epsilon(1e-14));   // harmonic mean
  CHECK(eff(1, 1) == Catch::Approx(2.5).epsilon(1e-14));   // arithmetic mean
  CHECK(eff(0, 1) == 0.0);

  const SymTensor<2> oracle = laminate_effective_oracle<2>(1.0, 4.0, 0);
  CHECK(oracle(0, 0) == Catch::Approx(eff(0, 0)).epsilon(1e-12));
  CHECK(oracle(1, 1) == Catch::Approx(eff(1, 1)).epsilon(1e-12));

  // swapping the axis swaps the roles
  const SymTensor<2> eff1 = homogenize_laminate<2>(1.0, 4.0, 1);
  CHECK(eff1(0, 0) == Catch::Approx(2.5).epsilon(1e-14));
  CHECK(eff1(1, 1) == Catch::Approx(1.6).epsilon(1e-14));
}

TEST_CASE("oscillating solutions approach the effective one") {
  const Grid<2> g(64);
  const BoundaryData<2> bd =
      BoundaryData<2>::expression([](const Vec<2>& x) { return x[0]; });
  const HomogenizationReport rep =
      gconv_experiment(1.0, 4.0, {0.5, 0.25}, bd, g);
  REQUIRE(rep.distances.size() == 2);
  CHECK(rep.distances[1] < rep.distances[0]);

  CHECK_THROWS_AS(gconv_experiment(1.0, 4.0, {0.05}, bd, g), config_error);
  CHECK_THROWS_AS(gconv_experiment(1.0, 4.0, {}, bd, g), config_error);
}

TEST_CASE("growth probe recovers the harmonic coordinate exactly") {
  ProbeOptions opts;
  opts.grid_m = 32;
  opts.levels = 4;
  const ProbeReport rep = liouville_probe(identity_field<2>(), 1.0, opts);
  CHECK(rep.gamma_hat == Catch::Approx(1.0).margin(1e-6));
  CHECK(rep.verdict == "nontrivial-growth");
  CHECK(rep.reference == 1.0);
  CHECK(rep.scales.size() == rep.supnorms.size());
}

TEST_CASE("growth probe tracks the anisotropic exponent") {
  ProbeOptions opts;
  opts.grid_m = 128;
  opts.levels = 7;
  const ProbeReport rep = liouville_probe(meyers_field<2>(1.0, 4.0), 0.5, opts);
  // frozen reference run: gamma_hat = 0.502 at m = 128, 7 levels
  CHECK(std::abs(rep.gamma_hat - 0.5) < 0.02);
  CHECK(rep.verdict == "nontrivial-growth");
}

TEST_CASE("sector mode measures the family's growth directly") {
  ProbeOptions opts;
  opts.mode = ProbeOptions::Mode::sector;
  opts.sectors = 3;
  const ProbeReport rep = liouville_probe(meyers_field<2>(1.0, 4.0), 0.75, opts);
  CHECK(std::abs(rep.gamma_hat - 0.75) < 1e-3);
}

TEST_CASE("probe rejects fields it cannot rescale") {
  const Grid<2> g(16);
  std::vector<SymTensor<2>> cells(static_cast<std::size_t>(g.num_cells()),
                                  SymTensor<2>::identity());
  const MatrixField<2> f = grid_sampled_field(g, std::move(cells), {1.0, 1.0});
  CHECK_THROWS_AS(liouville_probe(f, 1.0), std::invalid_argument);
}
