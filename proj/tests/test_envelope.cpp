#include "doctest.h"

#include "dcpl/envelope.hpp"
#include "dcpl/cutoffs.hpp"
#include "dcpl/pruning.hpp"
#include "dcpl/synth.hpp"

#include <cmath>
#include <stdexcept>

using namespace dcpl;

TEST_SUITE("envelope") {

TEST_CASE("amplitude grid covers [1, sqrt(R)] in half-octaves") {
  auto g = envelope_alpha_grid(256);
  REQUIRE(g.size() == 9);
  CHECK(g.front() == 1.0);
  CHECK(g.back() == doctest::Approx(16.0).epsilon(1e-12));
  for (size_t i = 0; i + 1 < g.size(); ++i)
    CHECK(g[i + 1] / g[i] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(envelope_alpha_grid(1024).size() == 11);
}

TEST_CASE("input validation") {
  auto p = make_family(FamilySpec{FamilyKind::flat}, 256, 1);
  CHECK_THROWS_AS(envelope_sides(p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(envelope_sides(p, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(envelope_sides(p, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("zero field yields a vacuous report") {
  FrequencyProfile zero;
  zero.R = 256;
  auto rep = envelope_sides(zero, 1.0);
  CHECK(rep.vacuous);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.rhs_core == 0.0);
  CHECK(rep.ratio == 0.0);
  REQUIRE(rep.gauge_population.size() == 3);
  CHECK(rep.gauge_population[1] == 0);
  CHECK(rep.gauge_population[2] == 0);
}

TEST_CASE("single plane wave: both sides in closed form") {
  FrequencyProfile p;
  p.R = 256;
  p.entries = {{0, 0, 1.0}};  // |f| = 1 everywhere
  auto rep = envelope_sides(p, 0.5);
  CHECK_FALSE(rep.alpha_in_range);  // 0.5 < 1
  CHECK_FALSE(rep.vacuous);
  // superlevel set is the whole cell, no boundary cells
  CHECK(rep.lhs == doctest::Approx(std::pow(0.5, 4) * 256.0 * 256.0).epsilon(1e-12));
  CHECK(rep.lhs_error == 0.0);
  // every tile of the single active cap is a gauge member at both levels, and
  // each sharp restricted norm is the tile area
  REQUIRE(rep.gauge_population.size() == 3);
  CHECK(rep.gauge_population[1] == 8);
  CHECK(rep.gauge_population[2] == 16);
  CHECK(rep.rhs_core == doctest::Approx(2.0 * 256.0 * 256.0).epsilon(1e-9));
  double kw = poly_weight_mass();
  CHECK(rep.rhs_weighted == doctest::Approx(2.0 * 256.0 * 256.0 * kw * kw).epsilon(1e-3));
  CHECK(rep.ratio == doctest::Approx(std::pow(0.5, 4) / 2.0).epsilon(1e-9));
  CHECK(rep.log_exponent < 0.0);  // ratio below one
}

TEST_CASE("alpha above the sup empties the superlevel set") {
  FrequencyProfile p;
  p.R = 256;
  p.entries = {{0, 0, 1.0}};
  auto rep = envelope_sides(p, 2.0);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.ratio == 0.0);
  CHECK_FALSE(rep.vacuous);  // the right side is alive
  CHECK(rep.rhs_core > 0.0);
}

TEST_CASE("report matches an independent superlevel count") {
  auto p = make_family(FamilySpec{FamilyKind::random_phase}, 256, 7);
  double alpha = 1.5;
  auto rep = envelope_sides(p, alpha);
  auto f = synthesize(p, make_grid(256, 4));
  double measure = superlevel_measure(f, alpha);
  CHECK(rep.lhs == doctest::Approx(std::pow(alpha, 4) * measure).epsilon(1e-12));
  CHECK(rep.lhs_error >= 0.0);
  CHECK(rep.rhs_weighted >= 0.0);
  // gauge populations agree with a cascade built at the same parameters
  CascadeConfig cfg;
  cfg.alpha = alpha;
  cfg.keep_stages = false;
  auto c = prune_cascade(p, cfg);
  for (int k = 1; k <= 2; ++k) {
    std::int64_t want = 0;
    for (size_t i = 0; i < c.gauge[k].size(); ++i) want += c.gauge_population(k, (int)i);
    CHECK(rep.gauge_population[k] == want);
  }
}

TEST_CASE("scan sweeps the grid once per amplitude and stays under the gate") {
  FamilySpec spec{FamilyKind::random_phase};
  auto scan = envelope_scan(spec, 256, 11);
  REQUIRE(scan.reports.size() == 9);
  auto grid = envelope_alpha_grid(256);
  double worst = -1e300;
  for (size_t i = 0; i < grid.size(); ++i) {
    CHECK(scan.reports[i].alpha == doctest::Approx(grid[i]).epsilon(1e-14));
    CHECK(scan.reports[i].family == "random_phase");
    if (!scan.reports[i].vacuous && scan.reports[i].ratio > 0.0 &&
        std::isfinite(scan.reports[i].ratio))
      worst = std::max(worst, scan.reports[i].log_exponent);
  }
  CHECK(scan.max_log_exponent == doctest::Approx(worst).epsilon(1e-12));
  CHECK(scan.max_log_exponent <= 31.0);
  // deterministic in the seed
  auto scan2 = envelope_scan(spec, 256, 11);
  for (size_t i = 0; i < scan.reports.size(); ++i) {
    CHECK(scan2.reports[i].lhs == scan.reports[i].lhs);
    CHECK(scan2.reports[i].rhs_core == scan.reports[i].rhs_core);
  }
}

}  // TEST_SUITE
