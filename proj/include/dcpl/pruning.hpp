#pragma once
// The pruning cascade: level-by-level gauge sets of tiles where a component's
// local weighted average clears an alpha-dependent threshold, and the masked
// component fields obtained by multiplying with the gauge partition weights.

#include <cstdint>
#include <vector>

#include "dcpl/cutoffs.hpp"
#include "dcpl/geom.hpp"
#include "dcpl/modfield.hpp"
#include "dcpl/synth.hpp"

namespace dcpl {

struct CascadeConfig {
  double alpha = 1.0;
  double Cp = 1e4;            // threshold constant
  double active_tol = 1e-14;  // a cap is active when its sup exceeds tol * ||f||_inf
  bool keep_stages = true;    // false: gauges only (cheap mode for scans)
};

// per active ground cap: its component, frame, and the masked stage fields
struct CapStage {
  int theta = 0;  // index at the ground level
  CapFrame frame;
  FrequencyProfile sub;
  SpectralBox raw_box;                 // frame box of the unpruned component
  ModulatedField unpruned;             // f_theta on the working subgrid
  std::vector<ModulatedField> staged;  // staged[i] = f_{N-i, theta}
  std::vector<SpectralBox> staged_box;
};

struct Cascade {
  std::uint64_t R = 0;
  CascadeConfig cfg;
  ScaleLadder ladder;
  CapTree tree;
  FrequencyProfile profile;
  double f_sup = 0.0;
  bool alpha_in_range = true;  // alpha in [1, sqrt(R)]
  std::vector<std::uint8_t> ground_active;
  std::vector<std::int64_t> active_count;  // per level 0..N
  std::vector<std::vector<PlateSpec>> plates;                 // [k][i], k >= 1
  std::vector<std::vector<std::vector<std::uint8_t>>> gauge;  // [k][i][residue]
  std::vector<CapStage> stages;

  int N() const { return ladder.N; }
  const ModulatedField& stage_field(int k, int t) const;  // f_{k, theta_t}
  // f_m - f_{m-1} for one ground cap (2 <= m <= N)
  ModulatedField bad_part(int m, int t) const;
  SpectralBox bad_box(int m, int t) const;
  TileMask mask_for(int k, int i) const;
  std::int64_t gauge_population(int k, int i) const;
};

// alpha > 0 and a not identically vanishing profile are required
Cascade prune_cascade(const FrequencyProfile& f, const CascadeConfig& cfg);

// assemble sums of per-cap subgrid fields on the standard grid
SampledField assemble_level(const Cascade& c, int k, const GridSpec& g);
SampledField assemble_bad(const Cascade& c, int m, const GridSpec& g);

struct CascadeInvariants {
  double monotonicity = 0.0;       // max pointwise growth along the stage chain
  double telescoping = 0.0;        // sup residual of f_N - (f_1 + sum of bad parts)
  double partition = 0.0;          // max |tile-weight sum - 1| over sampled points
  double leak_outer = 0.0;         // energy fraction outside the 2(N-k+1)-dilate
  double leak_inner = 0.0;         // energy fraction outside the 2(N-k)-dilate
  double replacement = 0.0;        // sup |f - f_N| on the standard grid
  double replacement_bound = 0.0;  // K alpha / (sqrt(Cp) log2 R)
};

CascadeInvariants cascade_invariants(const Cascade& c, double K_rep = 10.0);

// per-residue averages |U|^-1 integral of W_U sum_theta |f_theta|^2 over the
// unpruned components of cap i at level k
std::vector<double> unpruned_tile_averages(const Cascade& c, int k, int i);

}  // namespace dcpl
