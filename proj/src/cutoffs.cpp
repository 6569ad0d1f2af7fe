#include "dcpl/cutoffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dcpl/gridfft.hpp"

namespace dcpl {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double y) {
  double z = kPi * y;
  if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

double log_abs_sinc(double y) {
  double z = kPi * y;
  if (std::abs(z) < 1e-8) return std::log1p(-z * z / 6.0);
  return std::log(std::abs(std::sin(z))) - std::log(std::abs(z));
}

std::int64_t pos_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

double PlateauProfile::hat(double x) const {
  double v = 2.0 * w * sinc(2.0 * w * x);
  for (double a : radii) v *= sinc(2.0 * a * x);
  return v;
}

double PlateauProfile::hat_log_abs(double x) const {
  double v = std::log(2.0 * w) + log_abs_sinc(2.0 * w * x);
  for (double a : radii) v += log_abs_sinc(2.0 * a * x);
  return v;
}

double PlateauProfile::value(double t) const {
  double tt = std::abs(t);
  if (tt >= 1.0) return 0.0;
  if (tt <= 1.0 - eps0) return 1.0;
  // quintic Lagrange interpolation on the periodized table
  double u = tt / table_step;
  auto i0 = static_cast<std::int64_t>(std::floor(u));
  double s = u - static_cast<double>(i0);
  auto n = static_cast<std::int64_t>(table.size());
  double acc = 0.0;
  for (int d = -2; d <= 3; ++d) {
    double l = 1.0;
    for (int e = -2; e <= 3; ++e)
      if (e != d) l *= (s - e) / static_cast<double>(d - e);
    acc += l * table[static_cast<std::size_t>(pos_mod(i0 + d, n))];
  }
  return acc;
}

PlateauProfile make_plateau(double eps0, int mollifier_terms) {
  if (!(eps0 > 0.0 && eps0 <= 1.0))
    throw std::invalid_argument("make_plateau: eps0 must lie in (0, 1]");
  if (mollifier_terms < 1) throw std::invalid_argument("make_plateau: need at least one term");
  PlateauProfile g;
  g.eps0 = eps0;
  double r = eps0 / 2.0;
  g.w = 1.0 - r;
  double norm = 0.0;
  for (int n = 1; n <= mollifier_terms; ++n) norm += 1.0 / (static_cast<double>(n) * n);
  g.radii.resize(static_cast<std::size_t>(mollifier_terms));
  for (int n = 1; n <= mollifier_terms; ++n)
    g.radii[static_cast<std::size_t>(n - 1)] = r / (static_cast<double>(n) * n * norm);

  // periodize over [-2,2]: supp g = [-1,1], so the period-4 Fourier series
  // recovers g exactly; one backward FFT builds the lookup table
  const std::int64_t M = 1 << 18;
  const double P = 4.0;
  std::vector<std::complex<double>> line(static_cast<std::size_t>(M), {0.0, 0.0});
  double trailing = std::numeric_limits<double>::infinity();
  int quiet = 0;
  for (std::int64_t k = 0; k < M / 2; ++k) {
    double v = g.hat(static_cast<double>(k) / P) / P;
    line[static_cast<std::size_t>(k)] += v;
    if (k > 0) line[static_cast<std::size_t>(M - k)] += v;
    trailing = (k % 64 == 0) ? std::abs(v) : std::max(trailing, std::abs(v));
    if (k % 64 == 63) {
      quiet = trailing < 1e-19 ? quiet + 1 : 0;
      if (quiet >= 4) break;
    }
  }
  fft_line_inplace(line.data(), M, +1);
  g.table.resize(static_cast<std::size_t>(M));
  for (std::int64_t i = 0; i < M; ++i)
    g.table[static_cast<std::size_t>(i)] = line[static_cast<std::size_t>(i)].real();
  g.table_step = P / static_cast<double>(M);
  return g;
}

DecayFit decay_fit(const PlateauProfile& g, double xmin, double xmax, int windows,
                   int samples_per_window) {
  if (!(xmin > 0.0 && xmax > xmin)) throw std::invalid_argument("decay_fit: bad range");
  if (windows < 4 || samples_per_window < 8)
    throw std::invalid_argument("decay_fit: too few windows or samples");
  std::vector<double> us, ys;
  double ratio = xmax / xmin;
  for (int i = 0; i < windows; ++i) {
    double lo = xmin * std::pow(ratio, static_cast<double>(i) / windows);
    double hi = xmin * std::pow(ratio, static_cast<double>(i + 1) / windows);
    double best = -std::numeric_limits<double>::infinity(), bestx = lo;
    for (int k = 0; k < samples_per_window; ++k) {
      double x = lo + (hi - lo) * (k + 0.5) / samples_per_window;
      double y = g.hat_log_abs(x);
      if (y > best) {
        best = y;
        bestx = x;
      }
    }
    us.push_back(std::sqrt(bestx));
    ys.push_back(best);
  }
  // least squares y = logK - c u
  double n = static_cast<double>(us.size());
  double su = 0, sy = 0, suu = 0, suy = 0;
  for (std::size_t i = 0; i < us.size(); ++i) {
    su += us[i];
    sy += ys[i];
    suu += us[i] * us[i];
    suy += us[i] * ys[i];
  }
  double denom = n * suu - su * su;
  double slope = (n * suy - su * sy) / denom;
  double inter = (sy - slope * su) / n;
  double ss_res = 0, ss_tot = 0, ybar = sy / n;
  for (std::size_t i = 0; i < us.size(); ++i) {
    double e = ys[i] - (inter + slope * us[i]);
    ss_res += e * e;
    ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
  }
  DecayFit fit;
  fit.c = -slope;
  fit.logK = inter;
  fit.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  fit.rms = std::sqrt(ss_res / n);
  return fit;
}

FilterBank::FilterBank() : g_(make_plateau(0.5)) {}

double FilterBank::low(double r, double x1, double x2) const {
  if (!(r > 0.0)) throw std::invalid_argument("FilterBank::low: r must be positive");
  return g_.value(std::hypot(x1, x2) / (2.0 * r));
}

const FilterBank& filter_bank() {
  static const FilterBank bank;
  return bank;
}

namespace {

double sinc18(double y) {
  double s = sinc(y);
  double s2 = s * s;
  double s4 = s2 * s2;
  double s8 = s4 * s4;
  return s8 * s8 * s2;
}

double tile_weight_norm() {
  double z = sinc18(0.0);
  for (int n = 1; n <= 128; ++n) z += 2.0 * sinc18(static_cast<double>(n) / 12.0);
  return z;
}

}  // namespace

double tile_weight_1d(double t) {
  static const double Z = tile_weight_norm();
  return sinc18(t / 12.0) / Z;
}

double tile_weight(const PlateSpec& ps, std::int64_t a, std::int64_t b, double x1, double x2) {
  auto t = ps.tile_coords({x1, x2}, a, b);
  return tile_weight_1d(t[0]) * tile_weight_1d(t[1]);
}

double tile_partition_sum(const PlateSpec& ps, double x1, double x2) {
  // with every residue present the sheared double sum factors per axis
  double T1 = x1 / ps.L1 + static_cast<double>(ps.M) * x2 / static_cast<double>(ps.R);
  double u2 = x2 / static_cast<double>(ps.R);
  double s1 = 0.0, s2 = 0.0;
  for (auto a = static_cast<std::int64_t>(std::ceil(T1 - kTileWindow));
       a <= static_cast<std::int64_t>(std::floor(T1 + kTileWindow)); ++a)
    s1 += tile_weight_1d(T1 - static_cast<double>(a));
  for (auto b = static_cast<std::int64_t>(std::ceil(u2 - kTileWindow));
       b <= static_cast<std::int64_t>(std::floor(u2 + kTileWindow)); ++b)
    s2 += tile_weight_1d(u2 - static_cast<double>(b));
  return s1 * s2;
}

TileMask::TileMask(const PlateSpec& ps, std::vector<std::uint8_t> member)
    : plates_(ps), member_(std::move(member)) {
  if (static_cast<std::int64_t>(member_.size()) != plates_.n_tiles)
    throw std::invalid_argument("TileMask: membership size must equal the tile count");
  for (auto f : member_) n_member_ += f ? 1 : 0;
}

double TileMask::value(double x1, double x2) const {
  if (all()) return 1.0;
  if (none()) return 0.0;
  double T1 = x1 / plates_.L1 +
              static_cast<double>(plates_.M) * x2 / static_cast<double>(plates_.R);
  double u2 = x2 / static_cast<double>(plates_.R);
  auto a_lo = static_cast<std::int64_t>(std::ceil(T1 - kTileWindow));
  auto a_hi = static_cast<std::int64_t>(std::floor(T1 + kTileWindow));
  double wa[32];
  int na = static_cast<int>(a_hi - a_lo + 1);
  for (int i = 0; i < na; ++i)
    wa[i] = tile_weight_1d(T1 - static_cast<double>(a_lo + i));
  double acc = 0.0;
  std::int64_t n = plates_.n_tiles;
  for (auto b = static_cast<std::int64_t>(std::ceil(u2 - kTileWindow));
       b <= static_cast<std::int64_t>(std::floor(u2 + kTileWindow)); ++b) {
    double w2 = tile_weight_1d(u2 - static_cast<double>(b));
    std::int64_t shift = plates_.M * b;
    double row = 0.0;
    for (int i = 0; i < na; ++i)
      if (member_[static_cast<std::size_t>(pos_mod(a_lo + i - shift, n))]) row += wa[i];
    acc += w2 * row;
  }
  return acc;
}

double poly_weight_1d(double t) { return std::pow(1.0 + t * t, -100.0); }

double poly_weight(double t1, double t2) { return poly_weight_1d(t1) * poly_weight_1d(t2); }

double poly_weight_mass() {
  static const double m = [] {
    double one_d = std::exp(0.5 * std::log(kPi) + std::lgamma(99.5) - std::lgamma(100.0));
    return one_d * one_d;
  }();
  return m;
}

double bump_weight(double s, double x1, double x2) {
  if (!(s > 0.0)) throw std::invalid_argument("bump_weight: s must be positive");
  double u = 1.0 + (x1 * x1 + x2 * x2) / s;
  double u2 = u * u;
  double u4 = u2 * u2;
  double u10 = u4 * u4 * u2;
  return 9.0 / (kPi * s) / u10;
}

double box_mollifier_kernel_abs(const PlateauProfile& g, const Eigen::Matrix2d& B, double x1,
                                double x2) {
  Eigen::Vector2d y = B.transpose() * Eigen::Vector2d(x1, x2);
  return std::abs(B.determinant()) * std::abs(g.hat(y[0]) * g.hat(y[1]));
}

}  // namespace dcpl
