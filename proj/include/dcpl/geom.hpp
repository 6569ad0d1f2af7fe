#pragma once
// Frequency-side geometry: the scale ladder, nested cap partitions of [-1,1],
// small-cap partitions, plate tilings and their dual boxes, and the near relation.
// All cap endpoints are exact rationals; plate lattices are chosen commensurate
// with the R-periodic cell so that tilings wrap the torus exactly.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dcpl {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;  // always > 0, gcd(num,den) == 1

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d);
  static Rational from_double(double x);  // exact (doubles are dyadic rationals)

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const;
};

// R_0 = 1, R_k = (log2 R)^k for k < N, R_N = sqrt(R), with N the least integer
// >= (1/2) log2(R) / log2(log2(R)).
struct ScaleLadder {
  std::uint64_t R = 0;
  int log2R = 0;
  int N = 0;
  std::vector<double> scales;  // scales[k] = R_k, k = 0..N

  double RN() const { return scales[N]; }
};

ScaleLadder build_scale_ladder(std::uint64_t R);

struct Cap {
  int level = 0;
  int index = 0;
  Rational lo, hi;          // interval [lo,hi); the last cap at a level is closed
  bool closed_right = false;

  Rational width() const { return hi - lo; }
  Rational center() const;
  std::array<double, 2> tangent() const;  // (1, 2c)/sqrt(1+4c^2)
  std::array<double, 2> normal() const;   // (-2c, 1)/sqrt(1+4c^2)
  bool contains_xi1(std::int64_t j, std::int64_t R) const;  // is j/R in the interval
};

// Nested partitions of [-1,1]: level 0 is the single cap, level N is the ground
// partition into 2*ceil(sqrt(R)) equal caps, intermediate levels group consecutive
// ground caps into 2*R_k nearly equal blocks.
struct CapTree {
  ScaleLadder ladder;
  std::vector<std::vector<Cap>> levels;          // levels[k], k=0..N
  std::vector<std::vector<int>> parent;          // parent[k][i] = index at level k-1 (k>=1)
  std::vector<std::vector<std::array<int, 2>>> child_range;  // [k][i] -> [begin,end) at level k+1

  int n_levels() const { return static_cast<int>(levels.size()); }
  const Cap& cap(int k, int i) const { return levels[k][i]; }
  // [begin,end) range of level-l descendants of cap (k,i), l >= k
  std::array<int, 2> descendant_range(int k, int i, int l) const;
  int level_of_count(int k) const { return static_cast<int>(levels[k].size()); }
};

CapTree build_cap_tree(const ScaleLadder& ladder);

struct SmallCapPartition {
  std::uint64_t R = 0;
  double beta = 0;
  double width = 0;        // R^-beta
  std::vector<Cap> caps;   // level field = -1 to mark non-tree caps
};

// beta in [1/2, 1]; caps of width R^-beta from -1, last possibly shorter and closed.
SmallCapPartition build_small_caps(std::uint64_t R, double beta);

/// Plate tiling for a level-k cap: parallelogram tiles with lattice basis
// u = (L1, 0), v = (-M*L1, R) where L1 = R/n_tiles and the integer M makes the
// lattice contain R*Z^2 (so the tiling wraps the periodic cell exactly). The
// slope M/n_tiles is the snap of 2c to denominator n_tiles; at ungrouped levels
// it equals 2c exactly and the long edge is exactly parallel to the cap normal.
struct PlateSpec {
  Cap cap;
  std::uint64_t R = 0;
  int level = 0;
  int n_tiles = 0;        // tile residues per period
  double L1 = 0;          // short dim, = R/R_k when R_k = n_tiles
  double long_dim = 0;    // = R
  std::int64_t M = 0;     // integer shear: lattice slope = M/n_tiles
  double slope() const { return static_cast<double>(M) / n_tiles; }  // ~ 2c

  // tile center for planar lattice coords (a,b)
  std::array<double, 2> center(std::int64_t a, std::int64_t b) const;
  // residue id in [0, n_tiles) of planar tile (a,b); tiles with equal residue
  // coincide on the torus
  int residue(std::int64_t a, std::int64_t b) const;
  // sheared tile-frame coordinates of x relative to the center of tile (a,b);
  // t = (t1, t2) with t1, t2 in [-1/2, 1/2) exactly on the tile
  std::array<double, 2> tile_coords(std::array<double, 2> x, std::int64_t a, std::int64_t b) const;
  double area() const { return L1 * static_cast<double>(R); }
};

PlateSpec plate_tiling(const Cap& cap, const ScaleLadder& ladder);

// Planar tiles (a,b) whose parallelogram meets [0,R)^2.
std::vector<std::array<std::int64_t, 2>> tiles_intersecting_cell(const PlateSpec& ps);

// Dual box of a plate: extents (n_tiles/R) x (1/R), long axis along (1, slope)
// (~ the cap tangent), short axis along (0,1).
struct DualBox {
  double ext_tangent = 0;  // 1/L1 = n_tiles/R
  double ext_normal = 0;   // 1/R
  double slope = 0;        // tangent direction (1, slope)/norm
};

DualBox dual_box(const PlateSpec& ps);

// Caps are near when the gap between their intervals is at most
// kappa * log2(R) * max(width_a, width_b). Requires equal levels.
bool are_near(const Cap& a, const Cap& b, std::uint64_t R, double kappa = 1.0);

}  // namespace dcpl
