#pragma once
// Smooth cutoffs: plateau bumps with sub-exponential Fourier decay, radial
// low/high/band filter symbols, the tile partition of unity, and the
// polynomial tile weights used for local averages.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "dcpl/geom.hpp"

namespace dcpl {

// Plateau bump g: even, g = 1 on [-(1-eps0), 1-eps0], supp g = [-1, 1],
// built as an interval indicator mollified by a sequence of box kernels with
// radii a_n ~ n^-2 (sum eps0/2). The Fourier transform is an exact product
// of sinc factors and decays like exp(-c sqrt(x)).
struct PlateauProfile {
  double eps0 = 0.5;
  double w = 0.75;            // indicator half-width, 1 - eps0/2
  std::vector<double> radii;  // mollifier radii, sum = eps0/2

  double hat(double x) const;          // exact transform, 2w sinc(2wx) prod sinc(2 a_n x)
  double hat_log_abs(double x) const;  // log|hat|, -inf at zeros; no underflow
  double value(double t) const;        // 0/1 shortcuts outside the edge zone, table inside

  // interpolation table over one period of the [-2,2] periodization
  std::vector<double> table;
  double table_step = 0.0;
};

PlateauProfile make_plateau(double eps0, int mollifier_terms = 40);

struct DecayFit {
  double c = 0.0;     // fitted exponent in log|hat| ~ logK - c sqrt(x)
  double logK = 0.0;
  double r2 = 0.0;    // coefficient of determination of the windowed-maxima fit
  double rms = 0.0;   // rms log residual
};

// fit windowed maxima of |hat| on [xmin, xmax] against K exp(-c sqrt(x))
DecayFit decay_fit(const PlateauProfile& g, double xmin = 10.0, double xmax = 1000.0,
                   int windows = 64, int samples_per_window = 256);

// Radial filter symbols built from a plateau profile with eps0 = 1/2:
// low(r) = 1 on |xi| <= r, 0 outside |xi| <= 2r; high = 1 - low;
// band(r) = low(r) - low(r/2). Telescoping identities hold exactly.
class FilterBank {
 public:
  FilterBank();
  double low(double r, double x1, double x2) const;
  double high(double r, double x1, double x2) const { return 1.0 - low(r, x1, x2); }
  double band(double r, double x1, double x2) const {
    return low(r, x1, x2) - low(0.5 * r, x1, x2);
  }
  const PlateauProfile& profile() const { return g_; }

 private:
  PlateauProfile g_;
};

const FilterBank& filter_bank();  // shared instance

// One-dimensional tile weight psi1(t) = sinc(t/12)^18 / Z with
// Z = sum_n sinc(n/12)^18, so sum_{n in Z} psi1(t + n) = 1 exactly
// (the spectrum is the 18-fold autoconvolution of an interval of half-width
// 1/24, supported in [-3/4, 3/4], so the Poisson summation has a single
// surviving term). psi1 >= 0 everywhere, and a masked field's spectrum grows
// by at most 3/4 of a dual-cell width per axis.
double tile_weight_1d(double t);

// summation window: tails beyond |t| > 12 contribute < 1e-11
inline constexpr double kTileWindow = 12.0;

// Weight of the single tile (a, b) of a plate tiling at x; product of the
// two axis weights in tile coordinates.
double tile_weight(const PlateSpec& ps, std::int64_t a, std::int64_t b, double x1, double x2);

// Windowed sum of tile weights over all tiles (every residue); equals 1 up to
// the window truncation. Used by the partition self-test.
double tile_partition_sum(const PlateSpec& ps, double x1, double x2);

// Sum of tile weights over a residue subset; a gauge-set mask in [0, 1].
class TileMask {
 public:
  TileMask(const PlateSpec& ps, std::vector<std::uint8_t> member);
  double value(double x1, double x2) const;
  bool all() const { return n_member_ == plates_.n_tiles; }
  bool none() const { return n_member_ == 0; }
  std::int64_t member_count() const { return n_member_; }
  const PlateSpec& plates() const { return plates_; }
  const std::vector<std::uint8_t>& members() const { return member_; }

 private:
  PlateSpec plates_;
  std::vector<std::uint8_t> member_;  // indexed by residue
  std::int64_t n_member_ = 0;
};

// W(t) = (1 + t1^2)^-100 (1 + t2^2)^-100 in tile coordinates
double poly_weight(double t1, double t2);
double poly_weight_1d(double t);

// integral of W over the plane in tile coordinates: (sqrt(pi) Gamma(99.5) / Gamma(100))^2
double poly_weight_mass();

// w_s(x) = (9 / (pi s)) (1 + |x|^2 / s)^-10, unit mass on R^2
double bump_weight(double s, double x1, double x2);

// |rho^vee|(x) for the plateau mollifier of the parallelogram c + B [-1/2,1/2]^2
// (value 1 on the (1-eps0)-scaled box, 0 outside the doubled box):
// |det B| |g_hat(y1) g_hat(y2)| with y = B^T x
double box_mollifier_kernel_abs(const PlateauProfile& g, const Eigen::Matrix2d& B, double x1,
                                double x2);

}  // namespace dcpl
