#include "doctest.h"

#include "dcpl/cutoffs.hpp"
#include "dcpl/geom.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

using namespace dcpl;

TEST_SUITE("cutoffs") {

TEST_CASE("plateau profile shape") {
  auto g = make_plateau(0.5);
  CHECK(g.w == doctest::Approx(0.75).epsilon(1e-15));
  double rsum = 0;
  for (double a : g.radii) rsum += a;
  CHECK(rsum == doctest::Approx(0.25).epsilon(1e-12));  // radii sum to eps0/2

  CHECK(g.value(0.0) == 1.0);
  CHECK(g.value(0.5) == 1.0);     // plateau reaches 1 - eps0
  CHECK(g.value(-0.5) == 1.0);
  CHECK(g.value(1.0) == 0.0);
  CHECK(g.value(1.5) == 0.0);
  CHECK(g.value(0.75) > 0.0);
  CHECK(g.value(0.75) < 1.0);
  CHECK(g.value(0.6) == doctest::Approx(g.value(-0.6)).epsilon(1e-12));
  // weakly decreasing across the edge zone
  double prev = 1.0 + 1e-9;
  for (double t = 0.5; t <= 1.0; t += 1e-3) {
    double v = g.value(t);
    CHECK(v <= prev + 1e-9);
    prev = v;
  }
  CHECK_THROWS_AS(make_plateau(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_plateau(1.5), std::invalid_argument);
}

TEST_CASE("transform matches quadrature of the profile") {
  auto g = make_plateau(0.5);
  CHECK(g.hat(0.0) == doctest::Approx(1.5).epsilon(1e-12));  // mass 2w
  for (double x : {0.3, 1.0, 1.7, 5.5}) {
    // trapezoid over the support; g is even, so integrate cos on [0,1]
    const int n = 1 << 17;
    double h = 1.0 / n, s = 0.5 * g.value(0.0);
    for (int i = 1; i < n; ++i)
      s += g.value(i * h) * std::cos(2.0 * std::numbers::pi * x * i * h);
    double quad = 2.0 * h * s;
    CHECK(std::abs(g.hat(x) - quad) < 2e-5);
  }
  // log form agrees where the transform is not tiny
  CHECK(g.hat_log_abs(1.7) == doctest::Approx(std::log(std::abs(g.hat(1.7)))).epsilon(1e-9));
}

TEST_CASE("transform decays sub-exponentially with a positive fitted rate") {
  auto g = make_plateau(0.5);
  auto fit = decay_fit(g);
  CHECK(fit.c > 0.0);
  CHECK(fit.r2 > 0.9);
  // log-scale spread of the windowed maxima around the sqrt-law envelope
  CHECK(fit.rms < 2.0);
  // windowed maxima actually shrink across the fit range
  CHECK(std::exp(g.hat_log_abs(900.0)) < 1e-8);
}

TEST_CASE("filter symbols: supports, complement, telescoping") {
  const auto& fb = filter_bank();
  double r = 0.125;
  CHECK(fb.low(r, 0.0, 0.0) == 1.0);
  CHECK(fb.low(r, r, 0.0) == 1.0);                  // closed plateau at |xi| = r
  CHECK(fb.low(r, 2.0 * r, 0.0) == 0.0);            // support ends at 2r
  CHECK(fb.low(r, 3.0 * r, 0.0) == 0.0);
  double mid = fb.low(r, 1.5 * r, 0.0);
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);
  // radial: depends only on |xi|
  CHECK(fb.low(r, 0.1, 0.05) ==
        doctest::Approx(fb.low(r, std::hypot(0.1, 0.05), 0.0)).epsilon(1e-12));
  // high is the exact complement
  CHECK(fb.high(r, 1.5 * r, 0.0) == 1.0 - mid);
  // bands telescope to a difference of lows
  double x1 = 0.07, x2 = -0.02;
  double acc = 0.0;
  for (int k = 0; k < 6; ++k) acc += fb.band(r / (1 << k), x1, x2);
  CHECK(acc == doctest::Approx(fb.low(r, x1, x2) - fb.low(r / 64, x1, x2)).epsilon(1e-12));
}

TEST_CASE("1d tile weight is a nonnegative partition of unity") {
  std::mt19937_64 eng(123);
  std::uniform_real_distribution<double> uni(-0.5, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    double t = uni(eng) * 3.0;
    double s = 0.0;
    for (int n = -14; n <= 14; ++n) {
      double v = tile_weight_1d(t + n);
      CHECK(v >= -1e-14);
      s += v;
    }
    CHECK(std::abs(s - 1.0) < 1e-10);
  }
  CHECK(tile_weight_1d(0.0) > tile_weight_1d(0.3));
  CHECK(tile_weight_1d(0.25) == doctest::Approx(tile_weight_1d(-0.25)).epsilon(1e-13));
}

TEST_CASE("plate tile weights sum to one over the tiling") {
  auto ladder = build_scale_ladder(256);
  auto tree = build_cap_tree(ladder);
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> uni(0.0, 256.0);
  for (int level : {1, 2}) {
    auto ps = plate_tiling(tree.cap(level, (int)tree.levels[level].size() / 2), ladder);
    for (int trial = 0; trial < 20; ++trial) {
      double x1 = uni(eng), x2 = uni(eng);
      CHECK(std::abs(tile_partition_sum(ps, x1, x2) - 1.0) < 1e-8);
    }
  }
}

TEST_CASE("tile masks interpolate between zero and the full partition") {
  auto ladder = build_scale_ladder(256);
  auto tree = build_cap_tree(ladder);
  auto ps = plate_tiling(tree.cap(2, 10), ladder);
  std::vector<std::uint8_t> none(ps.n_tiles, 0), all(ps.n_tiles, 1), half(ps.n_tiles, 0);
  for (int i = 0; i < ps.n_tiles; i += 2) half[i] = 1;
  TileMask m_none(ps, none), m_all(ps, all), m_half(ps, half);
  CHECK(m_none.none());
  CHECK(m_all.all());
  CHECK(m_half.member_count() == ps.n_tiles / 2);
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> uni(0.0, 256.0);
  for (int trial = 0; trial < 12; ++trial) {
    double x1 = uni(eng), x2 = uni(eng);
    double va = m_all.value(x1, x2);
    double vh = m_half.value(x1, x2);
    CHECK(m_none.value(x1, x2) == 0.0);
    CHECK(std::abs(va - tile_partition_sum(ps, x1, x2)) < 1e-8);
    CHECK(vh >= -1e-14);
    CHECK(vh <= va + 1e-8);
  }
  CHECK_THROWS_AS(TileMask(ps, std::vector<std::uint8_t>(3, 1)), std::invalid_argument);
}

TEST_CASE("polynomial weight and its exact mass") {
  CHECK(poly_weight(0.0, 0.0) == 1.0);
  CHECK(poly_weight(0.5, -0.25) ==
        doctest::Approx(poly_weight_1d(0.5) * poly_weight_1d(-0.25)).epsilon(1e-13));
  double one_axis = std::sqrt(std::numbers::pi) *
                    std::exp(std::lgamma(99.5) - std::lgamma(100.0));
  CHECK(poly_weight_mass() == doctest::Approx(one_axis * one_axis).epsilon(1e-12));
}

TEST_CASE("radial bump has unit mass and the stated peak") {
  double s = 3.7;
  CHECK(bump_weight(s, 0.0, 0.0) == doctest::Approx(9.0 / (std::numbers::pi * s)).epsilon(1e-13));
  // radial quadrature: int_0^inf w(rho) 2 pi rho drho
  double h = 1e-3, acc = 0.0;
  for (int i = 0; i < 4000000; ++i) {
    double rho = (i + 0.5) * h;
    acc += bump_weight(s, rho, 0.0) * 2.0 * std::numbers::pi * rho * h;
  }
  CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("box mollifier kernel factorizes through the frame matrix") {
  auto g = make_plateau(0.5);
  Eigen::Matrix2d B = Eigen::Matrix2d::Identity();
  CHECK(box_mollifier_kernel_abs(g, B, 0.4, 1.3) ==
        doctest::Approx(std::abs(g.hat(0.4) * g.hat(1.3))).epsilon(1e-12));
  Eigen::Matrix2d S;
  S << 2.0, 0.0, 1.0, 0.5;  // sheared frame, det = 1
  double v = box_mollifier_kernel_abs(g, S, 0.4, 1.3);
  double y1 = S(0, 0) * 0.4 + S(1, 0) * 1.3;
  double y2 = S(0, 1) * 0.4 + S(1, 1) * 1.3;
  CHECK(v == doctest::Approx(std::abs(S.determinant()) * std::abs(g.hat(y1) * g.hat(y2)))
                 .epsilon(1e-12));
}

}  // TEST_SUITE
