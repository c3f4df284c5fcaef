#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ellreg/exact.hpp"
#include "ellreg/fem.hpp"
#include "ellreg/functionals.hpp"

using namespace ellreg;

TEST_CASE("oscillation exponent recovers the closed-form growth rates") {
  // every radius must be at least one node spacing, so the finest dyadic
  // ball actually contains off-center nodes: at m = 64, h = 1/32
  const Grid<2> g(64);
  for (double L : {1.0, 4.0, 9.0}) {
    const ScalarField<2> u = meyers_solution(1.0, L, g);
    const ExponentReport rep =
        holder_exponent(u, Vec<2>{}, dyadic_radii(1, 5));
    CHECK(std::abs(rep.exponent - std::sqrt(1.0 / L)) < 1e-3);
    CHECK(rep.residual < 1e-3);
  }
}

TEST_CASE("energies scale with the square of the field amplitude") {
  const Grid<2> g(32);
  const MatrixField<2> field = meyers_field<2>(1.0, 4.0);
  ScalarField<2> u = meyers_solution(1.0, 4.0, g);
  u.exact_gradient = nullptr;  // pure nodal path, no analytic shortcut
  const double c = 3.7;
  ScalarField<2> cu = u;
  for (double& v : cu.values) v *= c;

  for (double r : {0.3, 0.6, 0.9}) {
    const double e = dirichlet_energy_ball(u, field, r);
    const double ec = dirichlet_energy_ball(cu, field, r);
    CHECK(std::abs(ec - c * c * e) <= 1e-12 * std::abs(c * c * e));
    const double p = gradient_energy_ball(u, Vec<2>{}, r);
    const double pc = gradient_energy_ball(cu, Vec<2>{}, r);
    CHECK(std::abs(pc - c * c * p) <= 1e-12 * std::abs(c * c * p));
  }
}

TEST_CASE("two-phase product is constant for the exact family") {
  const Grid<2> g(128);
  const MatrixField<2> field = meyers_field<2>(1.0, 4.0);
  const auto phases = sector_solutions(1.0, 4.0, 2, g);
  const std::vector<double> radii{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const RadialTrace phi = acf_product(phases, field, radii);
  const double target = pi * pi;
  for (double v : phi.values) {
    CHECK(v > target * 0.98);
    CHECK(v < target * 1.02);
  }
}

TEST_CASE("overlapping phases are rejected with the offending node") {
  const Grid<2> g(16);
  auto phases = sector_solutions(1.0, 4.0, 2, g);
  // corrupt: give phase 2 mass inside phase 1's sector
  const index_t bump = g.node_index({12, 12});
  phases[1][bump] = 0.5;
  CHECK(phases[0][bump] > 0.0);
  CHECK_THROWS_AS(acf_product(phases, meyers_field<2>(1.0, 4.0), {0.5}),
                  std::invalid_argument);

  // a phase that misses the origin is also rejected
  auto shifted = sector_solutions(1.0, 4.0, 2, g);
  shifted[0][g.node_index({8, 8})] = 1.0;
  CHECK_THROWS_AS(acf_product(shifted, meyers_field<2>(1.0, 4.0), {0.5}),
                  std::invalid_argument);
}

TEST_CASE("monotonicity checker applies a relative tolerance") {
  RadialTrace t;
  t.radii = {0.25, 0.5};
  t.label = "t";

  t.values = {1.0, 0.9};
  const MonotonicityReport bad = check_monotone(t, 0.02);
  CHECK_FALSE(bad.is_monotone);
  CHECK(bad.worst_violation == Catch::Approx(-0.1));
  CHECK(bad.r_lo == 0.25);
  CHECK(bad.r_hi == 0.5);

  t.values = {1.0, 0.995};
  CHECK(check_monotone(t, 0.02).is_monotone);

  t.values = {1.0, 1.5};
  const MonotonicityReport good = check_monotone(t, 0.02);
  CHECK(good.is_monotone);
  CHECK(good.worst_violation >= 0.0);
}

TEST_CASE("growth fit is exact on exact power data") {
  RadialTrace t;
  t.label = "supnorm";
  for (int j = 0; j <= 6; ++j) {
    const double R = std::pow(2.0, j);
    t.radii.push_back(R);
    t.values.push_back(std::pow(R, 1.5));
  }
  const GrowthReport rep = growth_exponent(t);
  CHECK(rep.fit.exponent == Catch::Approx(1.5).margin(1e-12));
  CHECK(rep.fit.residual < 1e-12);
  for (double th : rep.theta) CHECK(th == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("fit preconditions name the offending trace") {
  RadialTrace t;
  t.label = "t";
  t.radii = {0.1, 0.2, 0.3};
  t.values = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(detail::loglog_fit(t), std::invalid_argument);  // < 4 radii
  t.radii.push_back(0.4);
  t.values.push_back(-1.0);  // nonpositive value
  CHECK_THROWS_AS(detail::loglog_fit(t), std::invalid_argument);
  t.values.back() = 4.0;
  t.radii.back() = 0.05;  // not increasing
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}

TEST_CASE("weighted energy with unit weight measures annulus volume") {
  const Grid<3> g(32);
  const MatrixField<3> field = identity_field<3>();
  ScalarField<3> u = sample_on_grid(
      g, [](const Vec<3>& x) { return x[2]; }, "axial");
  u.exact_gradient = [](const Vec<3>&) { return Vec<3>{0.0, 0.0, 1.0}; };
  ScalarField<3> one(g, "unit");
  for (double& v : one.values) v = 1.0;

  const double core = 8.0 * g.h();  // = 0.5 at m = 32
  const double r = 0.7;
  const double measured = weighted_energy(u, field, one, r);
  const double expected = 4.0 * pi / 3.0 * (r * r * r - core * core * core);
  CHECK(std::abs(measured - expected) < 0.02 * expected);

  CHECK_THROWS_AS(weighted_energy(u, field, one, 0.3),  // r < core
                  std::invalid_argument);
}

TEST_CASE("normalized decay trace of the axial pair is nondecreasing") {
  const Grid<3> g(48);
  const MatrixField<3> field = identity_field<3>();
  ScalarField<3> up = sample_on_grid(
      g, [](const Vec<3>& x) { return std::max(x[2], 0.0); }, "pos");
  up.exact_gradient = [](const Vec<3>& x) -> Vec<3> {
    return x[2] > 0.0 ? Vec<3>{0.0, 0.0, 1.0} : Vec<3>{};
  };
  const double mu = decay_exponent(1.0, 1.0, 3);
  CHECK(mu == Catch::Approx(std::sqrt(2.0) - 0.5).epsilon(1e-15));
  const RadialTrace t =
      decay_trace(up, field, {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}, mu);
  CHECK(check_monotone(t, 0.02).is_monotone);
}

TEST_CASE("dyadic default window ascends from 1/64 to 1/2") {
  const auto r = dyadic_radii();
  REQUIRE(r.size() == 6);
  CHECK(r.front() == Catch::Approx(1.0 / 64.0));
  CHECK(r.back() == Catch::Approx(0.5));
  for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i] > r[i - 1]);
}

TEST_CASE("empty balls cannot produce an oscillation") {
  const Grid<2> g(16);
  const ScalarField<2> u = meyers_solution(1.0, 4.0, g);
  // a tiny ball centered inside a cell contains no nodes at all
  const Vec<2> center{0.5 * g.h(), 0.5 * g.h()};
  CHECK_THROWS_AS(oscillation_trace(u, center, {1e-4}),
                  std::invalid_argument);
}

TEST_CASE("dyadic decay ratios convert to exponents") {
  CHECK(hole_filling_exponent(0.5) == Catch::Approx(0.5).margin(1e-15));
  CHECK(hole_filling_exponent(0.25) == Catch::Approx(1.0).margin(1e-15));
  CHECK(hole_filling_exponent(0.75) ==
        Catch::Approx(0.20751874963942190).margin(1e-12));
  CHECK_THROWS_AS(hole_filling_exponent(0.0), std::invalid_argument);
  CHECK_THROWS_AS(hole_filling_exponent(1.0), std::invalid_argument);
  CHECK_THROWS_AS(hole_filling_exponent(-2.0), std::invalid_argument);
}
