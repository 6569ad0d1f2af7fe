#include "dcpl/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dcpl/highlow.hpp"
#include "dcpl/modfield.hpp"

namespace dcpl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// per-tile contributions |U|^-1 ||S_U f||_2^4, alpha-independent; [k][i][res]
struct TileTables {
  std::vector<std::vector<std::vector<double>>> sharp;
  std::vector<std::vector<std::vector<double>>> weighted;
};

TileTables build_tile_tables(const Cascade& c) {
  const int N = c.N();
  TileTables tab;
  tab.sharp.resize(static_cast<std::size_t>(N) + 1);
  tab.weighted.resize(static_cast<std::size_t>(N) + 1);
  for (int k = 1; k <= N; ++k) {
    int nk = c.tree.level_of_count(k);
    tab.sharp[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(nk));
    tab.weighted[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(nk));
    for (int i = 0; i < nk; ++i) {
      auto range = c.tree.descendant_range(k, i, N);
      std::vector<SpectrumEntry> acc;
      for (const auto& st : c.stages) {
        if (st.theta < range[0] || st.theta >= range[1]) continue;
        auto e = field_spectrum(modulus_squared(st.unpruned),
                                SpectralBox{st.raw_box.j0 - st.raw_box.j1,
                                            st.raw_box.j1 - st.raw_box.j0,
                                            st.raw_box.m0 - st.raw_box.m1,
                                            st.raw_box.m1 - st.raw_box.m0},
                                0.0);
        acc.insert(acc.end(), e.begin(), e.end());
      }
      if (acc.empty()) continue;
      auto spec = merge_spectrum(std::move(acc));
      const auto& ps = c.plates[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      auto ints = tile_sharp_integrals(spec, ps);
      auto avgs = unpruned_tile_averages(c, k, i);
      auto& sh = tab.sharp[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      auto& wt = tab.weighted[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      sh.resize(ints.size());
      wt.resize(ints.size());
      for (std::size_t r = 0; r < ints.size(); ++r) {
        double I = std::max(ints[r].real(), 0.0);
        sh[r] = I * I / ps.area();
        wt[r] = ps.area() * avgs[r] * avgs[r];
      }
    }
  }
  return tab;
}

// superlevel measure of |f| on the sigma-oversampled grid, with the count of
// boundary-adjacent node pairs as a quantization proxy
struct Superlevel {
  std::int64_t nodes = 0;
  std::int64_t boundary_pairs = 0;
  double cell = 0.0;
};

Superlevel superlevel_scan(const FrequencyProfile& f, double alpha, int sigma) {
  Superlevel out;
  auto Mt = static_cast<std::int64_t>(sigma) * static_cast<std::int64_t>(f.R);
  double sp = static_cast<double>(f.R) / static_cast<double>(Mt);
  out.cell = sp * sp;
  double a2 = alpha * alpha;
  std::vector<std::uint8_t> first(static_cast<std::size_t>(Mt), 0);
  std::vector<std::uint8_t> prev(static_cast<std::size_t>(Mt), 0);
  std::vector<std::uint8_t> cur(static_cast<std::size_t>(Mt), 0);
  scan_rows(f, Mt, [&](std::int64_t q, const std::complex<double>* row) {
    for (std::int64_t p = 0; p < Mt; ++p)
      cur[static_cast<std::size_t>(p)] = std::norm(row[p]) > a2 ? 1 : 0;
    for (std::int64_t p = 0; p < Mt; ++p) {
      if (cur[static_cast<std::size_t>(p)]) ++out.nodes;
      if (cur[static_cast<std::size_t>(p)] !=
          cur[static_cast<std::size_t>((p + 1) % Mt)])
        ++out.boundary_pairs;
    }
    if (q == 0)
      first = cur;
    else
      for (std::int64_t p = 0; p < Mt; ++p)
        if (cur[static_cast<std::size_t>(p)] != prev[static_cast<std::size_t>(p)])
          ++out.boundary_pairs;
    std::swap(prev, cur);
  });
  for (std::int64_t p = 0; p < Mt; ++p)
    if (prev[static_cast<std::size_t>(p)] != first[static_cast<std::size_t>(p)])
      ++out.boundary_pairs;
  return out;
}

bool profile_is_zero(const FrequencyProfile& f) {
  for (const auto& e : f.entries)
    if (std::abs(e.a) != 0.0) return false;
  return true;
}

void finalize(EnvelopeReport& rep, std::uint64_t R) {
  double L = std::log2(static_cast<double>(R));
  if (rep.rhs_core > 0.0)
    rep.ratio = rep.lhs / rep.rhs_core;
  else
    rep.ratio = rep.lhs > 0.0 ? kInf : 0.0;
  rep.vacuous = rep.lhs == 0.0 && rep.rhs_core == 0.0;
  rep.log_exponent = (rep.ratio > 0.0 && std::isfinite(rep.ratio))
                         ? std::log(rep.ratio) / std::log(L)
                         : 0.0;
}

EnvelopeReport envelope_core(const FrequencyProfile& f, double alpha, double Cp, int sigma,
                             const TileTables* cached, TileTables* keep = nullptr) {
  validate_profile(f);
  if (!(alpha > 0.0)) throw std::invalid_argument("envelope_sides: alpha must be positive");
  if (!(Cp > 0.0)) throw std::invalid_argument("envelope_sides: C_p must be positive");

  EnvelopeReport rep;
  rep.R = f.R;
  rep.alpha = alpha;
  double sqrtR = std::sqrt(static_cast<double>(f.R));
  rep.alpha_in_range = alpha >= 1.0 && alpha <= sqrtR;

  if (profile_is_zero(f)) {
    auto ladder = build_scale_ladder(f.R);
    rep.gauge_population.assign(static_cast<std::size_t>(ladder.N) + 1, 0);
    finalize(rep, f.R);
    return rep;
  }

  CascadeConfig cfg;
  cfg.alpha = alpha;
  cfg.Cp = Cp;
  cfg.keep_stages = false;  // only gauges and unpruned stages are consumed
  Cascade c = prune_cascade(f, cfg);
  const int N = c.N();

  TileTables local;
  if (cached == nullptr) {
    local = build_tile_tables(c);
    if (keep != nullptr) *keep = local;
    cached = &local;
  }

  rep.gauge_population.assign(static_cast<std::size_t>(N) + 1, 0);
  for (int k = 1; k <= N; ++k) {
    int nk = c.tree.level_of_count(k);
    for (int i = 0; i < nk; ++i) {
      const auto& flags = c.gauge[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      const auto& sh = cached->sharp[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      const auto& wt = cached->weighted[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      for (std::size_t r = 0; r < flags.size(); ++r) {
        if (!flags[r]) continue;
        ++rep.gauge_population[static_cast<std::size_t>(k)];
        if (r < sh.size()) {
          rep.rhs_core += sh[r];
          rep.rhs_weighted += wt[r];
        }
      }
    }
  }

  auto sl = superlevel_scan(f, alpha, sigma);
  double a4 = alpha * alpha * alpha * alpha;
  rep.lhs = a4 * static_cast<double>(sl.nodes) * sl.cell;
  rep.lhs_error = a4 * static_cast<double>(sl.boundary_pairs) * sl.cell;
  finalize(rep, f.R);
  return rep;
}

}  // namespace

EnvelopeReport envelope_sides(const FrequencyProfile& f, double alpha, double Cp, int sigma) {
  return envelope_core(f, alpha, Cp, sigma, nullptr);
}

std::vector<double> envelope_alpha_grid(std::uint64_t R) {
  auto ladder = build_scale_ladder(R);
  std::vector<double> grid;
  for (int j = 0; j <= ladder.log2R; ++j) grid.push_back(std::pow(2.0, 0.5 * j));
  return grid;
}

EnvelopeScan envelope_scan(const FamilySpec& family, std::uint64_t R, std::uint64_t seed,
                           double Cp, int sigma) {
  FrequencyProfile f = make_family(family, R, seed);
  std::string name = family_kind_to_string(family.kind);

  EnvelopeScan sc;
  TileTables tab;
  bool have_tab = false;
  for (double alpha : envelope_alpha_grid(R)) {
    // the tile integrals are alpha-independent: build them on the first pass
    EnvelopeReport rep = have_tab ? envelope_core(f, alpha, Cp, sigma, &tab)
                                  : envelope_core(f, alpha, Cp, sigma, nullptr, &tab);
    have_tab = have_tab || !tab.sharp.empty();
    rep.family = name;
    if (std::isfinite(rep.ratio) && rep.ratio > 0.0)
      sc.max_log_exponent = std::max(sc.max_log_exponent, rep.log_exponent);
    sc.reports.push_back(std::move(rep));
  }
  return sc;
}

}  // namespace dcpl
