#include "dcpl/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcpl {

namespace {

// index of the level-k ancestor of ground cap g
int ancestor_index(const CapTree& tree, int g, int k) {
  int idx = g;
  for (int lvl = tree.n_levels() - 1; lvl > k; --lvl) idx = tree.parent[lvl][idx];
  return idx;
}

double sup_on_zoom(const FrequencyProfile& sub, const CapFrame& fr) {
  SpectralBox box = profile_box(sub, fr);
  if (box.empty()) return 0.0;
  std::int64_t M1 = pick_size(box.width(), 2);
  std::int64_t M2 = pick_size(box.height(), 2);
  return sup_norm(sample_field(sub, fr, M1, M2));
}

}  // namespace

const ModulatedField& Cascade::stage_field(int k, int t) const {
  int Nn = N();
  if (k < 1 || k > Nn) throw std::invalid_argument("stage_field: level out of range");
  const auto& st = stages[static_cast<std::size_t>(t)];
  if (static_cast<std::size_t>(Nn - k) >= st.staged.size())
    throw std::invalid_argument("stage_field: cascade was built without stages");
  return st.staged[static_cast<std::size_t>(Nn - k)];
}

ModulatedField Cascade::bad_part(int m, int t) const {
  int Nn = N();
  if (m < 2 || m > Nn) throw std::invalid_argument("bad_part: m must lie in [2, N]");
  const auto& st = stages[static_cast<std::size_t>(t)];
  if (static_cast<std::size_t>(Nn - m + 1) >= st.staged.size())
    throw std::invalid_argument("bad_part: cascade was built without stages");
  ModulatedField out = st.staged[static_cast<std::size_t>(Nn - m)];
  out.values -= st.staged[static_cast<std::size_t>(Nn - m + 1)].values;
  return out;
}

SpectralBox Cascade::bad_box(int m, int t) const {
  int Nn = N();
  if (m < 2 || m > Nn) throw std::invalid_argument("bad_box: m must lie in [2, N]");
  return stages[static_cast<std::size_t>(t)].staged_box[static_cast<std::size_t>(Nn - m + 1)];
}

TileMask Cascade::mask_for(int k, int i) const {
  return TileMask(plates[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)],
                  gauge[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
}

std::int64_t Cascade::gauge_population(int k, int i) const {
  const auto& g = gauge[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  std::int64_t c = 0;
  for (auto f : g) c += f ? 1 : 0;
  return c;
}

Cascade prune_cascade(const FrequencyProfile& f, const CascadeConfig& cfg) {
  validate_profile(f);
  if (!(cfg.alpha > 0.0)) throw std::invalid_argument("prune_cascade: alpha must be positive");
  if (!(cfg.Cp > 0.0)) throw std::invalid_argument("prune_cascade: Cp must be positive");
  if (f.entries.empty())
    throw std::invalid_argument("prune_cascade: profile has no coefficients");

  Cascade c;
  c.R = f.R;
  c.cfg = cfg;
  c.ladder = build_scale_ladder(f.R);
  c.tree = build_cap_tree(c.ladder);
  c.profile = f;
  c.f_sup = grid_sup_norm(f);
  if (!(c.f_sup > 0.0)) throw std::invalid_argument("prune_cascade: field vanishes on the grid");
  double sqrtR = std::sqrt(static_cast<double>(f.R));
  c.alpha_in_range = cfg.alpha >= 1.0 && cfg.alpha <= sqrtR;

  const int N = c.ladder.N;
  const double L = static_cast<double>(c.ladder.log2R);

  // plate tilings for every cap at levels 1..N
  c.plates.resize(static_cast<std::size_t>(N + 1));
  for (int k = 1; k <= N; ++k) {
    const auto& lvl = c.tree.levels[static_cast<std::size_t>(k)];
    auto& row = c.plates[static_cast<std::size_t>(k)];
    row.reserve(lvl.size());
    for (const auto& cap : lvl) row.push_back(plate_tiling(cap, c.ladder));
  }

  // activity per level: a cap counts when its own component's sup clears the cut
  const auto& ground = c.tree.levels.back();
  int n_ground = static_cast<int>(ground.size());
  c.ground_active.assign(static_cast<std::size_t>(n_ground), 0);
  c.active_count.assign(static_cast<std::size_t>(N + 1), 0);

  std::vector<FrequencyProfile> subs(static_cast<std::size_t>(n_ground));
  std::vector<CapFrame> frames(static_cast<std::size_t>(n_ground));
  for (int g = 0; g < n_ground; ++g) {
    subs[static_cast<std::size_t>(g)] = cap_component(f, ground[static_cast<std::size_t>(g)]);
    frames[static_cast<std::size_t>(g)] = cap_frame(ground[static_cast<std::size_t>(g)], f.R);
  }
  double cut = cfg.active_tol * c.f_sup;
  for (int g = 0; g < n_ground; ++g) {
    const auto& sub = subs[static_cast<std::size_t>(g)];
    if (!sub.entries.empty() && sup_on_zoom(sub, frames[static_cast<std::size_t>(g)]) > cut)
      c.ground_active[static_cast<std::size_t>(g)] = 1;
  }
  c.active_count[static_cast<std::size_t>(N)] =
      std::count(c.ground_active.begin(), c.ground_active.end(), std::uint8_t{1});
  for (int k = 0; k < N; ++k) {
    std::int64_t cnt = 0;
    const auto& lvl = c.tree.levels[static_cast<std::size_t>(k)];
    for (int i = 0; i < static_cast<int>(lvl.size()); ++i) {
      FrequencyProfile sub = cap_component(f, lvl[static_cast<std::size_t>(i)]);
      if (sub.entries.empty()) continue;
      CapFrame fr = cap_frame(lvl[static_cast<std::size_t>(i)], f.R);
      if (sup_on_zoom(sub, fr) > cut) ++cnt;
    }
    c.active_count[static_cast<std::size_t>(k)] = cnt;
  }
  if (c.active_count[static_cast<std::size_t>(N)] == 0)
    throw std::invalid_argument("prune_cascade: no active ground caps");

  // working subgrids: the raw component box plus every mask margin on the way down
  for (int g = 0; g < n_ground; ++g) {
    if (!c.ground_active[static_cast<std::size_t>(g)]) continue;
    CapStage st;
    st.theta = g;
    st.frame = frames[static_cast<std::size_t>(g)];
    st.sub = subs[static_cast<std::size_t>(g)];
    st.raw_box = profile_box(st.sub, st.frame);
    SpectralBox total = st.raw_box;
    for (int k = N; k >= 1; --k) {
      int anc = ancestor_index(c.tree, g, k);
      total = box_sum(total, mask_margin(c.plates[static_cast<std::size_t>(k)]
                                                 [static_cast<std::size_t>(anc)],
                                         st.frame));
    }
    // 2x oversampling keeps pointwise squares of every stage alias-free on
    // this subgrid, so downstream verifiers can read exact product spectra
    std::int64_t M1 = pick_size(total.width(), 2);
    std::int64_t M2 = pick_size(total.height(), 2);
    st.unpruned = sample_field(st.sub, st.frame, M1, M2);
    c.stages.push_back(std::move(st));
  }

  auto threshold = [&](double avg, std::int64_t count) {
    double lhs = cfg.Cp * L * L * L * L * avg;
    double rhs = cfg.alpha * cfg.alpha / (static_cast<double>(count) * static_cast<double>(count));
    return lhs >= rhs;
  };

  c.gauge.resize(static_cast<std::size_t>(N + 1));
  for (int k = 1; k <= N; ++k) {
    auto& lvlgauge = c.gauge[static_cast<std::size_t>(k)];
    lvlgauge.resize(c.tree.levels[static_cast<std::size_t>(k)].size());
    for (std::size_t i = 0; i < lvlgauge.size(); ++i)
      lvlgauge[i].assign(
          static_cast<std::size_t>(
              c.plates[static_cast<std::size_t>(k)][i].n_tiles),
          0);
  }

  // ground level: gauges from the unpruned component itself
  std::int64_t cnt_ground = c.active_count[static_cast<std::size_t>(N)];
  for (auto& st : c.stages) {
    const auto& ps = c.plates[static_cast<std::size_t>(N)][static_cast<std::size_t>(st.theta)];
    auto ints = tile_weighted_integrals(modulus_squared(st.unpruned), ps);
    auto& member = c.gauge[static_cast<std::size_t>(N)][static_cast<std::size_t>(st.theta)];
    for (std::size_t rho = 0; rho < ints.size(); ++rho)
      member[rho] = threshold(ints[rho] / ps.area(), cnt_ground) ? 1 : 0;
    ModulatedField masked = st.unpruned;
    multiply_mask_inplace(masked, TileMask(ps, member));
    st.staged.push_back(std::move(masked));
    st.staged_box.push_back(box_sum(st.raw_box, mask_margin(ps, st.frame)));
  }

  // descend: the level-k gauge thresholds the level-(k+1) pruned squares
  for (int k = N - 1; k >= 1; --k) {
    const auto& lvl = c.tree.levels[static_cast<std::size_t>(k)];
    std::int64_t cnt = c.active_count[static_cast<std::size_t>(k)];
    std::vector<std::vector<double>> sums(lvl.size());
    for (std::size_t i = 0; i < lvl.size(); ++i)
      sums[i].assign(static_cast<std::size_t>(
                         c.plates[static_cast<std::size_t>(k)][i].n_tiles),
                     0.0);
    for (auto& st : c.stages) {
      int anc = ancestor_index(c.tree, st.theta, k);
      const auto& ps = c.plates[static_cast<std::size_t>(k)][static_cast<std::size_t>(anc)];
      auto ints = tile_weighted_integrals(modulus_squared(st.staged.back()), ps);
      auto& acc = sums[static_cast<std::size_t>(anc)];
      for (std::size_t rho = 0; rho < ints.size(); ++rho) acc[rho] += ints[rho];
    }
    for (std::size_t i = 0; i < lvl.size(); ++i) {
      const auto& ps = c.plates[static_cast<std::size_t>(k)][i];
      auto& member = c.gauge[static_cast<std::size_t>(k)][i];
      for (std::size_t rho = 0; rho < member.size(); ++rho)
        member[rho] = threshold(sums[i][rho] / ps.area(), cnt) ? 1 : 0;
    }
    for (auto& st : c.stages) {
      int anc = ancestor_index(c.tree, st.theta, k);
      const auto& ps = c.plates[static_cast<std::size_t>(k)][static_cast<std::size_t>(anc)];
      TileMask mask(ps, c.gauge[static_cast<std::size_t>(k)][static_cast<std::size_t>(anc)]);
      ModulatedField masked = st.staged.back();
      multiply_mask_inplace(masked, mask);
      st.staged.push_back(std::move(masked));
      st.staged_box.push_back(box_sum(st.staged_box.back(), mask_margin(ps, st.frame)));
    }
  }

  if (!cfg.keep_stages)
    for (auto& st : c.stages) {
      // keep only the ground stage (used by level-k gauge recomputation) and
      // the unpruned field
      st.staged.resize(1);
      st.staged_box.resize(1);
    }
  return c;
}

SampledField assemble_level(const Cascade& c, int k, const GridSpec& g) {
  if (g.R != c.R) throw std::invalid_argument("assemble_level: grid R mismatch");
  CArray scatter = CArray::Zero(g.M, g.M);
  for (int t = 0; t < static_cast<int>(c.stages.size()); ++t) {
    const auto& st = c.stages[static_cast<std::size_t>(t)];
    accumulate_spectrum(scatter,
                        field_spectrum(c.stage_field(k, t),
                                       st.staged_box[static_cast<std::size_t>(c.N() - k)], 0.0));
  }
  SampledField out;
  out.grid = g;
  out.values = std::move(scatter);
  fft2_inplace(out.values, +1);
  return out;
}

SampledField assemble_bad(const Cascade& c, int m, const GridSpec& g) {
  if (g.R != c.R) throw std::invalid_argument("assemble_bad: grid R mismatch");
  CArray scatter = CArray::Zero(g.M, g.M);
  for (int t = 0; t < static_cast<int>(c.stages.size()); ++t)
    accumulate_spectrum(scatter, field_spectrum(c.bad_part(m, t), c.bad_box(m, t), 0.0));
  SampledField out;
  out.grid = g;
  out.values = std::move(scatter);
  fft2_inplace(out.values, +1);
  return out;
}

CascadeInvariants cascade_invariants(const Cascade& c, double K_rep) {
  if (c.stages.empty() || c.stages.front().staged.size() != static_cast<std::size_t>(c.N()))
    throw std::invalid_argument("cascade_invariants: cascade was built without stages");
  CascadeInvariants inv;
  const int N = c.N();

  for (const auto& st : c.stages) {
    RArray prev = st.unpruned.values.abs();
    for (const auto& stage : st.staged) {
      RArray cur = stage.values.abs();
      inv.monotonicity = std::max(inv.monotonicity, (cur - prev).maxCoeff());
      prev = std::move(cur);
    }
    // telescoping: f_N = f_1 + sum_{m=2..N} (f_m - f_{m-1}) pointwise
    CArray resid = st.staged.front().values - st.staged.back().values;
    for (int m = 2; m <= N; ++m) {
      resid -= st.staged[static_cast<std::size_t>(N - m)].values;
      resid += st.staged[static_cast<std::size_t>(N - m + 1)].values;
    }
    inv.telescoping = std::max(inv.telescoping, std::sqrt(resid.abs2().maxCoeff()));
  }

  // partition of unity, sampled at deterministic pseudo-random points
  Rng rng(substream(9, "partition-check"));
  for (int k = 1; k <= N; ++k) {
    const auto& row = c.plates[static_cast<std::size_t>(k)];
    const auto& ps = row[row.size() / 2];
    for (int it = 0; it < 64; ++it) {
      double x1 = static_cast<double>(c.R) * rng.uniform();
      double x2 = static_cast<double>(c.R) * rng.uniform();
      inv.partition = std::max(inv.partition, std::abs(tile_partition_sum(ps, x1, x2) - 1.0));
    }
  }

  // Fourier support leakage per stage, measured against cap dilates
  for (int t = 0; t < static_cast<int>(c.stages.size()); ++t) {
    const auto& st = c.stages[static_cast<std::size_t>(t)];
    const Cap& cap = c.tree.levels.back()[static_cast<std::size_t>(st.theta)];
    Rational ctr = cap.center();
    Rational w = cap.width();
    for (int k = N; k >= 1; --k) {
      auto spec = field_spectrum(c.stage_field(k, t),
                                 st.staged_box[static_cast<std::size_t>(N - k)], 0.0);
      double total = 0.0, outer = 0.0, inner = 0.0;
      int d_out = 2 * (N - k + 1);
      int d_in = std::max(2 * (N - k), 1);
      Rational lo_out = ctr - Rational(d_out, 2) * w, hi_out = ctr + Rational(d_out, 2) * w;
      Rational lo_in = ctr - Rational(d_in, 2) * w, hi_in = ctr + Rational(d_in, 2) * w;
      for (const auto& e : spec) {
        double en = std::norm(e.c);
        total += en;
        Rational xi(e.k1, static_cast<std::int64_t>(c.R));
        if (xi < lo_out || hi_out < xi) outer += en;
        if (xi < lo_in || hi_in < xi) inner += en;
      }
      if (total > 0.0) {
        inv.leak_outer = std::max(inv.leak_outer, outer / total);
        inv.leak_inner = std::max(inv.leak_inner, inner / total);
      }
    }
  }

  // replacement gap on the standard grid
  GridSpec g = make_grid(c.R);
  SampledField fN = assemble_level(c, N, g);
  SampledField full = synthesize(c.profile, g);
  inv.replacement = std::sqrt((full.values - fN.values).abs2().maxCoeff());
  inv.replacement_bound =
      K_rep * c.cfg.alpha / (std::sqrt(c.cfg.Cp) * static_cast<double>(c.ladder.log2R));
  return inv;
}

std::vector<double> unpruned_tile_averages(const Cascade& c, int k, int i) {
  if (k < 1 || k > c.N()) throw std::invalid_argument("unpruned_tile_averages: bad level");
  const auto& ps = c.plates[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  std::vector<double> out(static_cast<std::size_t>(ps.n_tiles), 0.0);
  auto range = c.tree.descendant_range(k, i, c.N());
  for (const auto& st : c.stages) {
    if (st.theta < range[0] || st.theta >= range[1]) continue;
    auto ints = tile_weighted_integrals(modulus_squared(st.unpruned), ps);
    for (std::size_t rho = 0; rho < out.size(); ++rho) out[rho] += ints[rho];
  }
  for (auto& v : out) v /= ps.area();
  return out;
}

}  // namespace dcpl
