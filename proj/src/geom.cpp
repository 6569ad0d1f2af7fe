#include "dcpl/geom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcpl {

namespace {

std::int64_t checked_i64(__int128 v, const char* what) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::runtime_error(std::string("rational overflow in ") + what);
  return static_cast<std::int64_t>(v);
}

Rational make_reduced(__int128 n, __int128 d, const char* what) {
  if (d == 0) throw std::invalid_argument("rational with zero denominator");
  if (d < 0) { n = -n; d = -d; }
  __int128 a = n < 0 ? -n : n, b = d;
  while (b) { __int128 t = a % b; a = b; b = t; }
  if (a == 0) a = 1;
  Rational r;
  r.num = checked_i64(n / a, what);
  r.den = checked_i64(d / a, what);
  return r;
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) { *this = make_reduced(n, d, "ctor"); }

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("from_double: non-finite");
  if (x == 0) return Rational(0, 1);
  int e = 0;
  double m = std::frexp(x, &e);           // x = m * 2^e, |m| in [1/2, 1)
  auto num = static_cast<std::int64_t>(std::ldexp(m, 53));  // exact 53-bit integer
  e -= 53;
  if (e >= 0) {
    if (e > 9) throw std::invalid_argument("from_double: magnitude too large");
    return Rational(num << e, 1);
  }
  if (-e > 60) {  // snap dyadic dust below 2^-60; exact for everything coarser
    return make_reduced(std::llround(std::ldexp(x, 60)), __int128(1) << 60, "from_double");
  }
  return make_reduced(num, __int128(1) << -e, "from_double");
}

Rational Rational::operator+(const Rational& o) const {
  return make_reduced(__int128(num) * o.den + __int128(o.num) * den, __int128(den) * o.den, "add");
}
Rational Rational::operator-(const Rational& o) const {
  return make_reduced(__int128(num) * o.den - __int128(o.num) * den, __int128(den) * o.den, "sub");
}
Rational Rational::operator*(const Rational& o) const {
  return make_reduced(__int128(num) * o.num, __int128(den) * o.den, "mul");
}
bool Rational::operator<(const Rational& o) const {
  return __int128(num) * o.den < __int128(o.num) * den;
}
bool Rational::operator<=(const Rational& o) const {
  return __int128(num) * o.den <= __int128(o.num) * den;
}

ScaleLadder build_scale_ladder(std::uint64_t R) {
  if (R < 256 || (R & (R - 1)) != 0)
    throw std::invalid_argument("build_scale_ladder: R must be a power of two >= 256");
  ScaleLadder lad;
  lad.R = R;
  lad.log2R = std::countr_zero(R);
  const std::uint64_t L = static_cast<std::uint64_t>(lad.log2R);
  // least N with L^(2N) >= R, i.e. (log2 R)^N >= sqrt(R)
  int N = 0;
  __int128 p = 1;
  while (p * p < static_cast<__int128>(R)) {
    p *= L;
    ++N;
  }
  lad.N = N;
  lad.scales.resize(N + 1);
  double s = 1.0;
  for (int k = 0; k < N; ++k) {
    lad.scales[k] = s;
    s *= static_cast<double>(L);
  }
  lad.scales[N] = std::sqrt(static_cast<double>(R));
  if (!(lad.scales[N - 1] < lad.scales[N]))
    throw std::runtime_error("build_scale_ladder: ladder not strictly increasing");
  return lad;
}

Rational Cap::center() const { return (lo + hi) * Rational(1, 2); }

std::array<double, 2> Cap::tangent() const {
  double c = center().value();
  double n = std::sqrt(1.0 + 4.0 * c * c);
  return {1.0 / n, 2.0 * c / n};
}

std::array<double, 2> Cap::normal() const {
  double c = center().value();
  double n = std::sqrt(1.0 + 4.0 * c * c);
  return {-2.0 * c / n, 1.0 / n};
}

bool Cap::contains_xi1(std::int64_t j, std::int64_t R) const {
  // lo <= j/R (< or <=) hi, exactly
  __int128 jl = __int128(j) * lo.den, lr = __int128(lo.num) * R;
  __int128 jh = __int128(j) * hi.den, hr = __int128(hi.num) * R;
  if (jl < lr) return false;
  return closed_right ? jh <= hr : jh < hr;
}

namespace {

std::uint64_t isqrt_ceil(std::uint64_t R) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(R)));
  while (r * r < R) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= R) --r;
  return r;
}

}  // namespace

CapTree build_cap_tree(const ScaleLadder& ladder) {
  CapTree t;
  t.ladder = ladder;
  const int N = ladder.N;
  t.levels.resize(N + 1);
  t.parent.resize(N + 1);
  t.child_range.resize(N + 1);

  // ground level: 2*ceil(sqrt(R)) equal caps
  const auto half = static_cast<std::int64_t>(isqrt_ceil(ladder.R));
  const std::int64_t nN = 2 * half;
  t.levels[N].resize(nN);
  for (std::int64_t i = 0; i < nN; ++i) {
    Cap& c = t.levels[N][i];
    c.level = N;
    c.index = static_cast<int>(i);
    c.lo = Rational(i - half, half);
    c.hi = Rational(i + 1 - half, half);
    c.closed_right = (i == nN - 1);
  }

  // group upward; level k holds 2 * (log2 R)^k caps, so level 0 splits at zero
  for (int k = N - 1; k >= 0; --k) {
    const auto& fine = t.levels[k + 1];
    const auto nf = static_cast<std::int64_t>(fine.size());
    __int128 rk = 1;
    for (int j = 0; j < k; ++j) rk *= ladder.log2R;
    std::int64_t nk = 2 * checked_i64(rk, "cap count");
    if (nk > nf) throw std::runtime_error("build_cap_tree: coarse level finer than ground");
    const std::int64_t base = nf / nk, rem = nf % nk;
    t.levels[k].resize(nk);
    t.child_range[k].resize(nk);
    t.parent[k + 1].assign(nf, 0);
    std::int64_t pos = 0;
    for (std::int64_t i = 0; i < nk; ++i) {
      // put the remainder on the outermost caps so reflection symmetry is kept
      // (every level size is even, hence rem is even too)
      std::int64_t sz = base + (i < rem / 2 || i >= nk - rem / 2 ? 1 : 0);
      Cap& c = t.levels[k][i];
      c.level = k;
      c.index = static_cast<int>(i);
      c.lo = fine[pos].lo;
      c.hi = fine[pos + sz - 1].hi;
      c.closed_right = (i == nk - 1);
      t.child_range[k][i] = {static_cast<int>(pos), static_cast<int>(pos + sz)};
      for (std::int64_t j = pos; j < pos + sz; ++j) t.parent[k + 1][j] = static_cast<int>(i);
      pos += sz;
    }
    if (pos != nf) throw std::runtime_error("build_cap_tree: grouping did not exhaust level");
  }
  return t;
}

std::array<int, 2> CapTree::descendant_range(int k, int i, int l) const {
  if (l < k || l >= n_levels()) throw std::invalid_argument("descendant_range: bad level");
  std::array<int, 2> r{i, i + 1};
  for (int j = k; j < l; ++j)
    r = {child_range[j][r[0]][0], child_range[j][r[1] - 1][1]};
  return r;
}

SmallCapPartition build_small_caps(std::uint64_t R, double beta) {
  if (!(beta >= 0.5 && beta <= 1.0))
    throw std::invalid_argument("build_small_caps: beta must lie in [1/2, 1]");
  if (R < 256 || (R & (R - 1)) != 0)
    throw std::invalid_argument("build_small_caps: R must be a power of two >= 256");
  SmallCapPartition p;
  p.R = R;
  p.beta = beta;
  p.width = std::pow(static_cast<double>(R), -beta);
  auto count = static_cast<std::int64_t>(std::ceil(2.0 / p.width * (1.0 - 1e-14)));
  p.caps.resize(count);
  for (std::int64_t i = 0; i < count; ++i) {
    Cap& c = p.caps[i];
    c.level = -1;
    c.index = static_cast<int>(i);
    double lo = -1.0 + static_cast<double>(i) * p.width;
    double hi = std::min(lo + p.width, 1.0);
    c.lo = Rational::from_double(lo);
    c.hi = (i == count - 1) ? Rational(1, 1) : Rational::from_double(hi);
    c.closed_right = (i == count - 1);
  }
  return p;
}

PlateSpec plate_tiling(const Cap& cap, const ScaleLadder& ladder) {
  if (cap.level < 1 || cap.level > ladder.N)
    throw std::invalid_argument("plate_tiling: cap level must be in [1, N]");
  PlateSpec ps;
  ps.cap = cap;
  ps.R = ladder.R;
  ps.level = cap.level;
  ps.n_tiles = static_cast<int>(std::llround(ladder.scales[cap.level]));
  ps.L1 = static_cast<double>(ladder.R) / ps.n_tiles;
  ps.long_dim = static_cast<double>(ladder.R);
  // M = round(2c * n_tiles) exactly, half away from zero
  Rational c = cap.center();
  __int128 num2 = __int128(2) * c.num * ps.n_tiles;
  __int128 den = c.den;
  __int128 q = num2 >= 0 ? (2 * num2 + den) / (2 * den) : -((2 * (-num2) + den) / (2 * den));
  ps.M = checked_i64(q, "plate shear");
  return ps;
}

std::array<double, 2> PlateSpec::center(std::int64_t a, std::int64_t b) const {
  return {static_cast<double>(a - M * b) * L1, static_cast<double>(b) * static_cast<double>(R)};
}

int PlateSpec::residue(std::int64_t a, std::int64_t b) const {
  std::int64_t r = (a - M * b) % n_tiles;
  if (r < 0) r += n_tiles;
  return static_cast<int>(r);
}

std::array<double, 2> PlateSpec::tile_coords(std::array<double, 2> x, std::int64_t a,
                                             std::int64_t b) const {
  const double Rd = static_cast<double>(R);
  double t2 = (x[1] - static_cast<double>(b) * Rd) / Rd;
  double t1 = (x[0] - static_cast<double>(a - M * b) * L1) / L1 + static_cast<double>(M) * t2;
  return {t1, t2};
}

std::vector<std::array<std::int64_t, 2>> tiles_intersecting_cell(const PlateSpec& ps) {
  std::vector<std::array<std::int64_t, 2>> out;
  const double n = ps.n_tiles;
  for (std::int64_t b = 0; b <= 1; ++b) {
    // t-range where the tile row meets x2 in [0,R)
    double tlo = std::max(-0.5, 0.0 - static_cast<double>(b));
    double thi = std::min(0.5, 1.0 - static_cast<double>(b));
    if (!(tlo < thi)) continue;
    const double Md = static_cast<double>(ps.M);
    std::int64_t alo =
        static_cast<std::int64_t>(std::floor(Md * b - std::abs(Md) * 0.5 - 1.5));
    std::int64_t ahi =
        static_cast<std::int64_t>(std::ceil(Md * b + std::abs(Md) * 0.5 + n + 1.5));
    for (std::int64_t a = alo; a <= ahi; ++a) {
      // x1 covers [0,R) iff the tile-frame coordinate A(t) = -c1/L1 + M t falls in
      // (-1/2 - n, 1/2) for some t in the admissible strip; A is linear in t
      double c1 = static_cast<double>(a - ps.M * b) * ps.L1;
      auto A = [&](double t) { return -c1 / ps.L1 + Md * t; };
      double a0 = A(tlo), a1 = A(thi);
      if (std::min(a0, a1) < 0.5 && std::max(a0, a1) > -0.5 - n) out.push_back({a, b});
    }
  }
  return out;
}

DualBox dual_box(const PlateSpec& ps) {
  DualBox d;
  d.ext_tangent = 1.0 / ps.L1;
  d.ext_normal = 1.0 / static_cast<double>(ps.R);
  d.slope = ps.slope();
  return d;
}

bool are_near(const Cap& a, const Cap& b, std::uint64_t R, double kappa) {
  if (a.level != b.level) throw std::invalid_argument("are_near: caps at different levels");
  int log2R = std::countr_zero(R);
  double wa = a.width().value(), wb = b.width().value();
  double gap = 0.0;
  if (b.lo.value() > a.hi.value()) gap = b.lo.value() - a.hi.value();
  else if (a.lo.value() > b.hi.value()) gap = a.lo.value() - b.hi.value();
  return gap <= kappa * static_cast<double>(log2R) * std::max(wa, wb);
}

}  // namespace dcpl
