#include "doctest.h"

#include "dcpl/geom.hpp"
#include "dcpl/gridfft.hpp"
#include "dcpl/highlow.hpp"
#include "dcpl/modfield.hpp"
#include "dcpl/pruning.hpp"
#include "dcpl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace dcpl;
using cplx = std::complex<double>;

namespace {

cplx e2pi(double z) {
  return std::polar(1.0, 2.0 * std::numbers::pi * z);
}

std::map<std::pair<std::int64_t, std::int64_t>, cplx> to_map(
    const std::vector<SpectrumEntry>& spec) {
  std::map<std::pair<std::int64_t, std::int64_t>, cplx> m;
  for (const auto& e : spec) m[{e.k1, e.k2}] += e.c;
  return m;
}

// brute-force correlation sum_{xi - xi' = nu} a(xi) conj(b(xi')) over |nu| <= d
std::vector<SpectrumEntry> brute_correlation(const std::vector<SpectrumEntry>& a,
                                             const std::vector<SpectrumEntry>& b,
                                             std::int64_t d1, std::int64_t d2) {
  std::map<std::pair<std::int64_t, std::int64_t>, cplx> m;
  for (const auto& ea : a)
    for (const auto& eb : b) {
      std::int64_t n1 = ea.k1 - eb.k1, n2 = ea.k2 - eb.k2;
      if (std::abs(n1) <= d1 && std::abs(n2) <= d2) m[{n1, n2}] += ea.c * std::conj(eb.c);
    }
  std::vector<SpectrumEntry> out;
  for (const auto& [k, c] : m)
    if (std::abs(c) > 0.0) out.push_back({k.first, k.second, c});
  return out;
}

void check_spectra_close(const std::vector<SpectrumEntry>& got,
                         const std::vector<SpectrumEntry>& want, double tol) {
  auto gm = to_map(got), wm = to_map(want);
  for (const auto& [k, c] : wm) {
    auto it = gm.find(k);
    if (std::abs(c) <= tol) continue;
    REQUIRE(it != gm.end());
    CHECK(std::abs(it->second - c) < tol);
  }
  for (const auto& [k, c] : gm)
    if (wm.find(k) == wm.end()) CHECK(std::abs(c) < tol);
}

Cascade cascade256(FamilyKind kind, std::uint64_t seed, double alpha = 2.0) {
  auto p = make_family(FamilySpec{kind}, 256, seed);
  CascadeConfig cfg;
  cfg.alpha = alpha;
  return prune_cascade(p, cfg);
}

}  // namespace

TEST_SUITE("highlow") {

TEST_CASE("merge_spectrum folds duplicates and drops zeros") {
  std::vector<SpectrumEntry> raw{{2, 1, {1.0, 0.0}}, {0, 0, {0.5, 0.5}},
                                 {2, 1, {-1.0, 0.0}}, {0, 0, {0.5, -0.5}},
                                 {-3, 4, {0.0, 2.0}}};
  auto m = merge_spectrum(raw);
  REQUIRE(m.size() == 2);  // (2,1) cancels exactly
  CHECK(m[0].k1 == -3);
  CHECK(m[0].k2 == 4);
  CHECK(m[1].k1 == 0);
  CHECK(m[1].c == cplx{1.0, 0.0});
}

TEST_CASE("lattice values match the direct trigonometric sum") {
  std::vector<SpectrumEntry> spec{{1, 0, {0.7, 0.0}}, {-2, 3, {0.0, 1.1}}, {5, -5, {0.4, -0.4}}};
  auto v = values_on_lattice(spec, 8);
  REQUIRE(v.rows() == 8);
  for (auto [i, j] : {std::pair<int, int>{0, 0}, {3, 1}, {7, 6}}) {
    cplx direct = 0;
    for (const auto& e : spec)
      direct += e.c * e2pi((e.k1 * static_cast<double>(i) + e.k2 * static_cast<double>(j)) / 8.0);
    CHECK(std::abs(v(j, i) - direct) < 1e-12);
  }
}

TEST_CASE("filtered energy is the weighted coefficient mass") {
  std::vector<SpectrumEntry> spec{{0, 0, {2.0, 0.0}}, {16, -3, {0.0, 1.0}}, {-64, 17, {1.0, 1.0}}};
  auto mult = [](double x1, double x2) { return x1 * x1 + std::abs(x2) + 0.25; };
  double want = 0;
  for (const auto& e : spec) {
    double m = mult(e.k1 / 256.0, e.k2 / 256.0);
    want += m * m * std::norm(e.c);
  }
  want *= 256.0 * 256.0;
  CHECK(filtered_energy(spec, 256, mult) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("filtered sup agrees with a brute folding scan") {
  std::vector<SpectrumEntry> spec{{0, 0, {0.8, 0.1}}, {1, 0, {0.0, -0.6}}};
  auto mult = [](double, double) { return 1.0; };
  double got = filtered_sup(spec, 256, mult, 8);
  // spectrum spans 2 columns; the fold is at least 64 points per axis, and the
  // sup of |a + b e(i/M)| over i is approached on any multiple of that lattice
  double brute = 0;
  for (int i = 0; i < 4096; ++i)
    brute = std::max(brute, std::abs(spec[0].c + spec[1].c * e2pi(i / 4096.0)));
  CHECK(got <= brute + 1e-12);
  // the internal fold lattice is coarser than 4096 points; allow its
  // quadratic interpolation gap
  CHECK(got >= brute - 1e-3);
  // a single mode: sup is the scaled modulus, exactly
  std::vector<SpectrumEntry> one{{7, 2, {0.3, -0.4}}};
  auto half = [](double, double) { return 0.5; };
  CHECK(filtered_sup(one, 256, half) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("windowed correlation matches the brute-force pair sum") {
  std::vector<SpectrumEntry> a{{0, 0, {1.0, 0.5}}, {2, 1, {-0.5, 0.0}}, {5, -2, {0.0, 2.0}}};
  std::vector<SpectrumEntry> b{{1, 0, {0.7, -0.7}}, {2, 1, {0.25, 0.0}}, {4, -2, {1.0, 0.0}}};
  for (auto [d1, d2] : {std::pair<std::int64_t, std::int64_t>{1, 1}, {3, 2}, {10, 10}}) {
    auto got = windowed_correlation(a, b, d1, d2);
    auto want = brute_correlation(a, b, d1, d2);
    check_spectra_close(got, want, 1e-13);
  }
}

TEST_CASE("fft product spectrum equals the brute-force correlation") {
  auto tree = build_cap_tree(build_scale_ladder(256));
  const Cap& cap = tree.cap(2, 20);
  auto fr = cap_frame(cap, 256);
  std::vector<SpectrumEntry> a{{64, 16, {1.0, 0.5}}, {70, 19, {-0.5, 0.3}}, {79, 24, {0.0, 2.0}}};
  std::vector<SpectrumEntry> b{{66, 17, {0.7, -0.7}}, {75, 22, {0.25, 1.0}}};
  auto got = product_spectrum(a, b, 256, fr);
  auto want = brute_correlation(a, b, 1 << 20, 1 << 20);
  check_spectra_close(got, want, 1e-11);
}

TEST_CASE("square spectrum is the self-correlation") {
  auto tree = build_cap_tree(build_scale_ladder(256));
  const Cap& cap = tree.cap(2, 5);
  auto fr = cap_frame(cap, 256);
  std::vector<SpectrumEntry> a{{-176, 121, {0.6, 0.0}}, {-172, 116, {0.0, -1.0}},
                               {-166, 108, {0.5, 0.5}}};
  auto got = square_spectrum(a, 256, fr);
  auto want = brute_correlation(a, a, 1 << 20, 1 << 20);
  check_spectra_close(got, want, 1e-11);
  // DC term carries the coefficient mass
  double mass = 0;
  for (const auto& e : a) mass += std::norm(e.c);
  for (const auto& e : got)
    if (e.k1 == 0 && e.k2 == 0) CHECK(std::abs(e.c - cplx{mass, 0.0}) < 1e-12);
}

TEST_CASE("radial bump transform against Hankel quadrature") {
  CHECK(radial_bump_transform(4.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  for (auto [s, rho] : {std::pair<double, double>{4.0, 0.1}, {16.0, 0.05}, {1.0, 0.4}}) {
    double h = 5e-4 * std::sqrt(s), acc = 0.0;
    for (int i = 0; i < 120000; ++i) {
      double r = (i + 0.5) * h;
      double w = 9.0 / (std::numbers::pi * s) * std::pow(1.0 + r * r / s, -10.0);
      acc += w * std::cyl_bessel_j(0.0, 2.0 * std::numbers::pi * rho * r) * 2.0 *
             std::numbers::pi * r * h;
    }
    CHECK(radial_bump_transform(s, rho) == doctest::Approx(acc).epsilon(1e-5));
  }
  // decreases toward zero
  CHECK(radial_bump_transform(4.0, 0.5) < radial_bump_transform(4.0, 0.1));
  CHECK(radial_bump_transform(4.0, 1e6) == 0.0);
}

TEST_CASE("plateau modulus transform against direct quadrature") {
  const auto& g = filter_bank().profile();
  for (double omega : {0.0, 0.3, 2.0}) {
    double h = 1.0 / 256, acc = 0.0;
    for (int i = 0; i < (1 << 19); ++i) {
      double x = (i + 0.5) * h;
      acc += std::abs(g.hat(x)) * std::cos(2.0 * std::numbers::pi * omega * x) * 2.0 * h;
    }
    CHECK(std::abs(plateau_abs_transform(omega) - acc) < 2e-4 * plateau_abs_transform(0.0));
  }
}

TEST_CASE("box kernel multiplier factorizes and validates extents") {
  auto mult = box_kernel_multiplier(0.5, 0.125, 2.0);
  for (auto [x1, x2] : {std::pair<double, double>{0.1, 0.3}, {-0.2, 0.05}}) {
    double want = plateau_abs_transform(x1 / 0.5) *
                  plateau_abs_transform((x2 - 2.0 * x1) / 0.125);
    CHECK(mult(x1, x2) == doctest::Approx(want).epsilon(1e-12));
  }
  CHECK_THROWS_AS(box_kernel_multiplier(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(box_kernel_multiplier(1.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("member spectra: unpruned equals the raw component") {
  auto c = cascade256(FamilyKind::random_phase, 3);
  // find the stage of ground cap 20
  int t = -1;
  for (int s = 0; s < (int)c.stages.size(); ++s)
    if (c.stages[s].theta == 20) t = s;
  REQUIRE(t >= 0);
  auto spec = member_spectrum(c, Member::unpruned, 0, 2, 20);
  std::vector<SpectrumEntry> want;
  for (const auto& e : c.stages[t].sub.entries) want.push_back({e.j, e.m, e.a});
  check_spectra_close(spec, want, 1e-11);
  // bad member is the difference of consecutive stage spectra
  auto bad = member_spectrum(c, Member::bad, 2, 2, 20);
  auto f2 = member_spectrum(c, Member::pruned, 2, 2, 20);
  auto f1 = member_spectrum(c, Member::pruned, 1, 2, 20);
  for (auto& e : f1) e.c = -e.c;
  auto diff = merge_spectrum([&] {
    auto v = f2;
    v.insert(v.end(), f1.begin(), f1.end());
    return v;
  }());
  check_spectra_close(bad, diff, 1e-10);
  CHECK_THROWS_AS(member_spectrum(c, Member::bad, 1, 2, 20), std::invalid_argument);
  CHECK_THROWS_AS(member_spectrum(c, Member::unpruned, 0, 5, 0), std::invalid_argument);
}

TEST_CASE("square field sums the component squares on the grid") {
  auto c = cascade256(FamilyKind::random_phase, 9);
  auto g = make_grid(256, 4);
  auto left = square_field(c, Member::unpruned, 0, 0, 0, g);
  auto right = square_field(c, Member::unpruned, 0, 0, 1, g);
  REQUIRE(left.values.rows() == g.M);
  CHECK(left.values.minCoeff() >= -1e-10);
  // direct: synthesize every ground component and accumulate |.|^2
  RArray want = RArray::Zero(g.M, g.M);
  for (const auto& st : c.stages) {
    auto f = synthesize(st.sub, g);
    want += f.values.abs2();
  }
  CHECK((left.values + right.values - want).abs().maxCoeff() < 1e-9);
  // restriction to a level-1 cap only sums its descendants
  auto sq1 = square_field(c, Member::unpruned, 0, 1, 3, g);
  RArray want1 = RArray::Zero(g.M, g.M);
  for (const auto& st : c.stages)
    if (st.theta / 2 == 3) {
      auto f = synthesize(st.sub, g);
      want1 += f.values.abs2();
    }
  CHECK((sq1.values - want1).abs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(square_field(c, Member::unpruned, 0, 0, 0, make_grid(512, 4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(square_field(c, Member::unpruned, 0, 3, 0, g), std::invalid_argument);
}

TEST_CASE("restricted square norms partition the grid energy") {
  auto c = cascade256(FamilyKind::random_phase, 15);
  auto g = make_grid(256, 4);
  auto sq = square_field(c, Member::unpruned, 0, 2, 20, g);
  const auto& ps = c.plates[2][20];
  double total = 0;
  for (int r = 0; r < ps.n_tiles; ++r) {
    double nr = restricted_square_norm(sq, ps, r);
    CHECK(nr >= 0.0);
    total += nr * nr;
  }
  // the residues partition the grid nodes, so the tile energies add up to the
  // whole-cell integral of the square field
  double grid_energy = sq.values.sum() * g.cell_area();
  CHECK(total == doctest::Approx(grid_energy).epsilon(1e-10));
  CHECK_THROWS_AS(restricted_square_norm(sq, ps, -1), std::invalid_argument);
  CHECK_THROWS_AS(restricted_square_norm(sq, ps, ps.n_tiles), std::invalid_argument);
}

TEST_CASE("report pass rule and log exponent") {
  auto r1 = make_report("t", 256, 100.0, 1.0, 0.0, 100.0, 0.5);
  CHECK(r1.ratio == doctest::Approx(100.0));
  CHECK(r1.log_exponent == doctest::Approx(std::log(100.0) / std::log(8.0)).epsilon(1e-12));
  CHECK(r1.pass);  // 100 <= 100 * 8^0.5
  auto r2 = make_report("t", 256, 1000.0, 1.0, 1.0, 1.0, 0.0);
  CHECK_FALSE(r2.pass);  // 1000 > 1 * 8^1
  auto r3 = make_report("t", 256, 0.0, 0.0, 0.0);
  CHECK(r3.vacuous);
  CHECK(r3.pass);
  auto r4 = make_report("t", 256, 1.0, 0.0, 0.0);
  CHECK(std::isinf(r4.ratio));
  CHECK_FALSE(r4.pass);
}

TEST_CASE("low-frequency identity is trivial for a single active cap") {
  FrequencyProfile p;
  p.R = 256;
  p.entries = {{64, 16, {1.0, 0.2}}, {70, 19, {0.5, -0.5}}, {75, 22, {0.0, 0.7}}};
  CascadeConfig cfg;
  cfg.alpha = 1.0;
  auto c = prune_cascade(p, cfg);
  auto rep = low_lemma_residual(c, 2, 2, 0, 1.0 / 16.0);
  CHECK(rep.lemma == "low");
  CHECK(rep.pass);
  CHECK(rep.ratio <= 1e-6);
  CHECK_THROWS_AS(low_lemma_residual(c, 1, 2, 0, 1.0 / 16), std::invalid_argument);
  CHECK_THROWS_AS(low_lemma_residual(c, 2, 2, 3, 1.0 / 16), std::invalid_argument);
  CHECK_THROWS_AS(low_lemma_residual(c, 2, 2, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(low_lemma_residual(c, 2, 2, 0, 0.0), std::invalid_argument);
}

TEST_CASE("low-frequency identity on a generic field") {
  auto c = cascade256(FamilyKind::random_phase, 21);
  auto rep = low_lemma_residual(c, 2, 2, 0, 1.0 / 16.0);
  CHECK(rep.pass);
  CHECK(rep.ratio <= 1e-6);
  // restricting to a single level-1 parent also holds
  auto rep1 = low_lemma_residual(c, 2, 2, 1, 1.0 / 16.0);
  CHECK(rep1.pass);
}

TEST_CASE("high-frequency bounds hold with the stated log powers") {
  auto c = cascade256(FamilyKind::random_phase, 33);
  for (char v : {'a', 'b', 'c'}) {
    auto rep = high_lemma_ratio(c, v, 2, 1, v == 'c' ? 1 : 0);
    CHECK(rep.lemma == std::string("high-") + v);
    CHECK(rep.pass);
  }
  CHECK_THROWS_AS(high_lemma_ratio(c, 'd', 2, 1, 0), std::invalid_argument);
}

TEST_CASE("local constancy verifiers run and pass at desk scale") {
  auto c = cascade256(FamilyKind::random_phase, 45);
  ConstancyParams prm;
  prm.m = 2;
  prm.k = 1;
  prm.cap = 8;
  auto rep_tau = constancy_ratio(c, ConstancyKind::pointwise_tau, prm);
  CHECK(rep_tau.lemma == "const-pointwise-tau");
  CHECK(rep_tau.pass);

  ConstancyParams pt;
  pt.cap = c.stages.front().theta;
  auto rep_theta = constancy_ratio(c, ConstancyKind::pointwise_theta, pt);
  CHECK(rep_theta.pass);

  ConstancyParams ia;
  ia.m = 2;
  ia.k = 1;
  ia.cap = 8;
  ia.r = build_scale_ladder(256).scales[1] / 256.0;
  auto rep_a = constancy_ratio(c, ConstancyKind::integrated_a, ia);
  CHECK(rep_a.pass);
  ia.r = 64.0;  // violates the band-radius hypothesis (2 L^4 / R = 32)
  CHECK_THROWS_AS(constancy_ratio(c, ConstancyKind::integrated_a, ia), std::invalid_argument);

  ConstancyParams ib;
  ib.m = 2;
  ib.k = 2;
  ib.cap = 20;
  auto rep_b = constancy_ratio(c, ConstancyKind::integrated_b, ib);
  CHECK(rep_b.lemma == "const-integrated-b");
  CHECK(rep_b.pass);
}

TEST_CASE("pointwise constancy rejects an inactive ground cap") {
  FrequencyProfile p;
  p.R = 256;
  p.entries = {{64, 16, {1.0, 0.0}}, {70, 19, {0.0, 0.5}}};
  CascadeConfig cfg;
  cfg.alpha = 1.0;
  auto c = prune_cascade(p, cfg);  // only cap 20 active
  ConstancyParams prm;
  prm.cap = 5;
  CHECK_THROWS_AS(constancy_ratio(c, ConstancyKind::pointwise_theta, prm),
                  std::invalid_argument);
}

TEST_CASE("weak high-domination: part a passes, part b can be vacuous") {
  auto c = cascade256(FamilyKind::random_phase, 57, 2.0);
  auto ra = weak_high_domination(c, 2, 0, 'a');
  CHECK(ra.lemma == "whd-a");
  CHECK(ra.pass);
  auto rb = weak_high_domination(c, 2, 1, 'b');
  CHECK(rb.lemma == "whd-b");
  CHECK(rb.pass);
  // an alpha far above the field sup qualifies no point at all
  auto chuge = cascade256(FamilyKind::random_phase, 57, 1e8);
  auto rv = weak_high_domination(chuge, 2, 1, 'b');
  CHECK(rv.vacuous);
  CHECK(rv.pass);
  CHECK_THROWS_AS(weak_high_domination(c, 1, 0, 'a'), std::invalid_argument);
  CHECK_THROWS_AS(weak_high_domination(c, 2, 2, 'a'), std::invalid_argument);
  CHECK_THROWS_AS(weak_high_domination(c, 2, 0, 'c'), std::invalid_argument);
}

TEST_CASE("broad/narrow dichotomy never leaves a point unclassified") {
  // mid-range threshold: the ground gauge keeps most tiles while the level-1
  // mask discards, so the bad parts are nonzero and the verdicts nonvacuous
  auto c = cascade256(FamilyKind::random_phase, 69, 1e4);
  auto scan = dichotomy_scan(c, 2, 16);
  CHECK(scan.nodes == 16 * 16);
  CHECK(scan.checks > 0);
  CHECK(scan.violations == 0);
  CHECK(scan.worst_margin >= 1.0);
}

TEST_CASE("dichotomy: a single active cap is narrow everywhere") {
  FrequencyProfile p;
  p.R = 256;
  p.entries = {{64, 16, {1.0, 0.2}}, {70, 19, {0.5, -0.5}}, {75, 22, {0.0, 0.7}}};
  CascadeConfig cfg;
  cfg.alpha = 1.0;
  auto c = prune_cascade(p, cfg);
  DichotomyTable table(c, 2, 8);
  for (std::int64_t ix = 0; ix < 8; ++ix)
    for (std::int64_t iy = 0; iy < 8; ++iy)
      for (const auto& v : table.classify_point(ix, iy))
        if (v.lhs > 1e-12) CHECK(v.narrow);
}

TEST_CASE("bilinear restriction: validation and vacuous pass") {
  auto tree = build_cap_tree(build_scale_ladder(256));
  auto p = make_family(FamilySpec{FamilyKind::random_phase}, 256, 81);
  const Cap& tau = tree.cap(1, 0);
  const Cap& taup = tree.cap(1, 15);
  CHECK_THROWS_AS(bilinear_ratio(p, tau, taup, 0.1, 1.0, 16.0), std::invalid_argument);
  CHECK_THROWS_AS(bilinear_ratio(p, tau, tree.cap(1, 1), 0.5, 1.0, 16.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(bilinear_ratio(p, tau, taup, 0.25, 1.0, 2.0), std::invalid_argument);

  // zero component on tau: empty superlevel set, vacuous report
  FrequencyProfile onecap;
  onecap.R = 256;
  onecap.entries = {{64, 16, {1.0, 0.0}}};
  auto rep = bilinear_ratio(onecap, tau, taup, 0.25, 0.5, 16.0);
  CHECK(rep.vacuous);
  CHECK(rep.pass);

  auto live = bilinear_ratio(p, tau, taup, 0.25, 0.8, 16.0);
  CHECK(live.lemma == "bilinear");
  CHECK(live.params.at("S") == 16.0);
  CHECK(live.pass);
}

}  // TEST_SUITE
