#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "ellreg/exact.hpp"
#include "ellreg/fundsol.hpp"

using namespace ellreg;

namespace {
// One shared point-load solve per field; the solves dominate the runtime.
const FundamentalSolutionField& identity_fs() {
  static const FundamentalSolutionField fs =
      compute_fundamental(identity_field<3>(), Grid<3>(48));
  return fs;
}
}  // namespace

TEST_CASE("grid floor for the point-load probe") {
  CHECK_THROWS_AS(compute_fundamental(identity_field<3>(), Grid<3>(32)),
                  config_error);
}

TEST_CASE("point-load solution is positive on the probe annulus") {
  const FundamentalSolutionField& fs = identity_fs();
  CHECK_FALSE(fs.negativity_flag);
  CHECK(fs.min_annulus_value >= -1e-8);
  CHECK(fs.core_radius == Catch::Approx(8.0 * Grid<3>(48).h()));
  CHECK(fs.gamma[fs.load_node] > 0.0);
}

TEST_CASE("two-sided bounds bracket the centered decay profile") {
  const FundamentalSolutionField& fs = identity_fs();
  const double r_in = 8.0 / 24.0;  // 8h at m = 48
  const BoundsReport rep = bounds_ratio(fs, r_in, 0.45);
  CHECK(rep.C1 > 0.0);
  CHECK(rep.C2 >= rep.C1);
  CHECK(rep.C2 / rep.C1 < 2.5);
  CHECK(rep.m == 48);

  CHECK_THROWS_AS(bounds_ratio(fs, 0.1, 0.45), std::invalid_argument);
  CHECK_THROWS_AS(bounds_ratio(fs, r_in, 0.6), std::invalid_argument);
  CHECK_THROWS_AS(bounds_ratio(fs, 0.45, 0.4), std::invalid_argument);
}

TEST_CASE("annulus gradient energy tracks the harmonic reference") {
  const FundamentalSolutionField& fs = identity_fs();
  const double r = 1.0 / 3.0;
  const double measured = annulus_gradient_energy(fs, r);
  // for Gamma = 1/(4 pi |x|): int_{r<|x|<3r/2} |grad Gamma|^2
  //   = (1/4pi) (1/r - 2/(3r)) = 1/(12 pi r)
  const double reference = 1.0 / (12.0 * pi * r);
  CHECK(measured == Catch::Approx(reference).epsilon(0.25));

  CHECK_THROWS_AS(annulus_gradient_energy(fs, 0.1),  // r < 8h
                  std::invalid_argument);
  CHECK_THROWS_AS(annulus_gradient_energy(fs, 0.4),  // 1.5r > 1/2
                  std::invalid_argument);
}

TEST_CASE("anisotropic point load stays positive too") {
  const FundamentalSolutionField fs =
      compute_fundamental(meyers_field<3>(1.0, 4.0), Grid<3>(48));
  CHECK_FALSE(fs.negativity_flag);
  const double r_in = 8.0 / 24.0;
  const BoundsReport rep = bounds_ratio(fs, r_in, 0.45);
  CHECK(rep.C1 > 0.0);
  CHECK(rep.C2 / rep.C1 < 3.0);
}
