#include "dcpl/highlow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace dcpl {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::int64_t pos_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

SpectralBox corr_box(const SpectralBox& b) {
  return SpectralBox{b.j0 - b.j1, b.j1 - b.j0, b.m0 - b.m1, b.m1 - b.m0};
}

// difference box A - B (all xi - xi' with xi in A, xi' in B)
SpectralBox diff_box(const SpectralBox& a, const SpectralBox& b) {
  return SpectralBox{a.j0 - b.j1, a.j1 - b.j0, a.m0 - b.m1, a.m1 - b.m0};
}

// the stage field and spectral box a Member kind refers to, for one ground cap
struct Picked {
  ModulatedField field;
  SpectralBox box;
};

Picked pick_member(const Cascade& c, Member kind, int m, int t) {
  const auto& st = c.stages[static_cast<std::size_t>(t)];
  const int N = c.N();
  if (kind != Member::unpruned && st.staged.size() != static_cast<std::size_t>(N))
    throw std::invalid_argument("pick_member: cascade was built without stages");
  switch (kind) {
    case Member::unpruned:
      return {st.unpruned, st.raw_box};
    case Member::pruned:
      if (m < 1 || m > N) throw std::invalid_argument("pick_member: stage out of range");
      return {c.stage_field(m, t), st.staged_box[static_cast<std::size_t>(N - m)]};
    case Member::bad:
      return {c.bad_part(m, t), c.bad_box(m, t)};
  }
  throw std::invalid_argument("pick_member: unknown member kind");
}

// spectrum of |field of one member|^2 on its own (2x oversampled) subgrid
std::vector<SpectrumEntry> member_square_spectrum(const Cascade& c, Member kind, int m, int t) {
  Picked p = pick_member(c, kind, m, t);
  return field_spectrum(modulus_squared(p.field), corr_box(p.box), 0.0);
}

std::vector<SpectrumEntry> apply_multiplier(const std::vector<SpectrumEntry>& spec,
                                            std::uint64_t R, const Multiplier& mult) {
  std::vector<SpectrumEntry> out;
  out.reserve(spec.size());
  double Rd = static_cast<double>(R);
  for (const auto& e : spec) {
    double v = mult(static_cast<double>(e.k1) / Rd, static_cast<double>(e.k2) / Rd);
    if (v != 0.0) out.push_back({e.k1, e.k2, e.c * v});
  }
  return out;
}

std::int64_t spectrum_span(const std::vector<SpectrumEntry>& spec) {
  if (spec.empty()) return 0;
  std::int64_t j0 = spec.front().k1, j1 = spec.front().k1;
  std::int64_t m0 = spec.front().k2, m1 = spec.front().k2;
  for (const auto& e : spec) {
    j0 = std::min(j0, e.k1);
    j1 = std::max(j1, e.k1);
    m0 = std::min(m0, e.k2);
    m1 = std::max(m1, e.k2);
  }
  return std::max(j1 - j0 + 1, m1 - m0 + 1);
}

double lattice_sup(const std::vector<SpectrumEntry>& spec, std::int64_t M) {
  if (spec.empty()) return 0.0;
  return std::sqrt(values_on_lattice(spec, M).abs2().maxCoeff());
}

// caps near cap (k, i) at its own level, self included
std::vector<std::vector<int>> near_lists(const CapTree& tree, int level, std::uint64_t R,
                                         double kappa) {
  int n = tree.level_of_count(level);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (are_near(tree.cap(level, i), tree.cap(level, j), R, kappa))
        out[static_cast<std::size_t>(i)].push_back(j);
  return out;
}

// a cap is active when it has an active ground descendant
std::vector<std::uint8_t> level_activity(const Cascade& c, int level) {
  int n = c.tree.level_of_count(level);
  std::vector<std::uint8_t> act(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    auto range = c.tree.descendant_range(level, i, c.N());
    for (int g = range[0]; g < range[1]; ++g)
      if (c.ground_active[static_cast<std::size_t>(g)]) {
        act[static_cast<std::size_t>(i)] = 1;
        break;
      }
  }
  return act;
}

// R_j on the ladder, continued as pure powers of log2 R past the top level
double scale_extended(const ScaleLadder& ladder, int j) {
  if (j <= ladder.N) return ladder.scales[static_cast<std::size_t>(j)];
  return std::pow(static_cast<double>(ladder.log2R), static_cast<double>(j));
}

// worst node of exact values against smoothed values on a shared fold lattice
struct NodeRatio {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool vacuous = true;
};

NodeRatio worst_node_ratio(const std::vector<SpectrumEntry>& spec, std::uint64_t R,
                           const Multiplier& mult, std::int64_t oversample = 4) {
  NodeRatio out;
  if (spec.empty()) return out;
  auto smoothed = apply_multiplier(spec, R, mult);
  std::int64_t M = pick_size(std::max<std::int64_t>(spectrum_span(spec), 8), oversample);
  RArray lv = values_on_lattice(spec, M).real();
  RArray rv = smoothed.empty() ? RArray::Zero(M, M).eval() : values_on_lattice(smoothed, M).real();
  double lmax = lv.maxCoeff();
  out.vacuous = !(lmax > 0.0);
  for (Eigen::Index q = 0; q < lv.rows(); ++q)
    for (Eigen::Index p = 0; p < lv.cols(); ++p) {
      double num = std::max(lv(q, p), 0.0);
      double den = rv(q, p);
      if (den <= 0.0) {
        if (num > 1e-12 * lmax && out.ratio < kInf) {
          out.ratio = kInf;
          out.lhs = num;
          out.rhs = 0.0;
        }
        continue;
      }
      double r = num / den;
      if (r > out.ratio) {
        out.ratio = r;
        out.lhs = num;
        out.rhs = den;
      }
    }
  return out;
}

}  // namespace

std::vector<SpectrumEntry> merge_spectrum(std::vector<SpectrumEntry> spec) {
  std::sort(spec.begin(), spec.end(), [](const SpectrumEntry& a, const SpectrumEntry& b) {
    return a.k1 != b.k1 ? a.k1 < b.k1 : a.k2 < b.k2;
  });
  std::vector<SpectrumEntry> out;
  out.reserve(spec.size());
  for (const auto& e : spec) {
    if (!out.empty() && out.back().k1 == e.k1 && out.back().k2 == e.k2)
      out.back().c += e.c;
    else
      out.push_back(e);
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const SpectrumEntry& e) { return std::abs(e.c) == 0.0; }),
            out.end());
  return out;
}

FrequencyProfile spectrum_profile(const std::vector<SpectrumEntry>& spec, std::uint64_t R) {
  FrequencyProfile p;
  p.R = R;
  p.entries.reserve(spec.size());
  for (const auto& e : spec) p.entries.push_back({e.k1, e.k2, e.c});
  return p;
}

std::vector<SpectrumEntry> member_spectrum(const Cascade& c, Member kind, int m, int k, int i) {
  const int N = c.N();
  if (k < 0 || k > N) throw std::invalid_argument("member_spectrum: level out of range");
  if (i < 0 || i >= c.tree.level_of_count(k))
    throw std::invalid_argument("member_spectrum: cap index out of range");
  if (kind == Member::bad && (m < 2 || m > N))
    throw std::invalid_argument("member_spectrum: bad part needs 2 <= m <= N");
  auto range = c.tree.descendant_range(k, i, N);
  std::vector<SpectrumEntry> acc;
  for (int t = 0; t < static_cast<int>(c.stages.size()); ++t) {
    const auto& st = c.stages[static_cast<std::size_t>(t)];
    if (st.theta < range[0] || st.theta >= range[1]) continue;
    Picked p = pick_member(c, kind, m, t);
    auto e = field_spectrum(p.field, p.box, 0.0);
    acc.insert(acc.end(), e.begin(), e.end());
  }
  return merge_spectrum(std::move(acc));
}

ModulatedField sample_spectrum_on_frame(const std::vector<SpectrumEntry>& spec, std::uint64_t R,
                                        const CapFrame& fr, std::int64_t oversample) {
  FrequencyProfile p = spectrum_profile(spec, R);
  SpectralBox box = profile_box(p, fr);
  std::int64_t M1 = pick_size(box.width(), oversample);
  std::int64_t M2 = pick_size(box.height(), oversample);
  return sample_field(p, fr, M1, M2);
}

std::vector<SpectrumEntry> square_spectrum(const std::vector<SpectrumEntry>& spec,
                                           std::uint64_t R, const CapFrame& fr) {
  if (spec.empty()) return {};
  ModulatedField f = sample_spectrum_on_frame(spec, R, fr, 2);
  SpectralBox box = profile_box(spectrum_profile(spec, R), fr);
  return field_spectrum(modulus_squared(f), corr_box(box), 0.0);
}

std::vector<SpectrumEntry> windowed_correlation(const std::vector<SpectrumEntry>& a,
                                                const std::vector<SpectrumEntry>& b,
                                                std::int64_t d1, std::int64_t d2) {
  if (a.empty() || b.empty()) return {};
  if (d1 < 0 || d2 < 0) throw std::invalid_argument("windowed_correlation: window must be >= 0");

  // column index over b (inputs are sorted by (k1, k2))
  std::int64_t c0 = b.front().k1, c1 = b.back().k1;
  std::vector<std::array<std::size_t, 2>> cols(static_cast<std::size_t>(c1 - c0 + 1),
                                               {b.size(), b.size()});
  for (std::size_t idx = 0; idx < b.size(); ++idx) {
    auto& slot = cols[static_cast<std::size_t>(b[idx].k1 - c0)];
    if (slot[0] == b.size()) slot[0] = idx;
    slot[1] = idx + 1;
  }

  std::int64_t w1 = 2 * d1 + 1, w2 = 2 * d2 + 1;
  std::vector<std::complex<double>> bins(static_cast<std::size_t>(w1 * w2), 0.0);
  for (const auto& ea : a) {
    std::int64_t klo = std::max(ea.k1 - d1, c0), khi = std::min(ea.k1 + d1, c1);
    for (std::int64_t kc = klo; kc <= khi; ++kc) {
      auto slot = cols[static_cast<std::size_t>(kc - c0)];
      if (slot[0] >= slot[1]) continue;
      auto first = b.begin() + static_cast<std::ptrdiff_t>(slot[0]);
      auto last = b.begin() + static_cast<std::ptrdiff_t>(slot[1]);
      auto it = std::lower_bound(first, last, ea.k2 - d2,
                                 [](const SpectrumEntry& e, std::int64_t v) { return e.k2 < v; });
      std::int64_t base = (ea.k1 - kc + d1) * w2 + d2 + ea.k2;
      for (; it != last && it->k2 <= ea.k2 + d2; ++it)
        bins[static_cast<std::size_t>(base - it->k2)] += ea.c * std::conj(it->c);
    }
  }

  std::vector<SpectrumEntry> out;
  for (std::int64_t n1 = -d1; n1 <= d1; ++n1)
    for (std::int64_t n2 = -d2; n2 <= d2; ++n2) {
      auto c = bins[static_cast<std::size_t>((n1 + d1) * w2 + (n2 + d2))];
      if (std::abs(c) != 0.0) out.push_back({n1, n2, c});
    }
  return out;
}

std::vector<SpectrumEntry> product_spectrum(const std::vector<SpectrumEntry>& a,
                                            const std::vector<SpectrumEntry>& b, std::uint64_t R,
                                            const CapFrame& fr) {
  if (a.empty() || b.empty()) return {};
  SpectralBox A = profile_box(spectrum_profile(a, R), fr);
  SpectralBox B = profile_box(spectrum_profile(b, R), fr);
  SpectralBox P = diff_box(A, B);
  // only the product box must fit the grid; the factors may fold freely
  std::int64_t M1 = pick_size(P.width());
  std::int64_t M2 = pick_size(P.height());
  if (M1 * M2 > (std::int64_t{1} << 26))
    throw std::runtime_error("product_spectrum: product grid too large");

  auto scatter = [&](const std::vector<SpectrumEntry>& s) {
    CArray arr = CArray::Zero(M2, M1);
    for (const auto& e : s) {
      std::int64_t dj = e.k1 - fr.jc;
      std::int64_t dm = e.k2 - fr.mc - fr.s * dj;
      arr(static_cast<Eigen::Index>(pos_mod(dm, M2)), static_cast<Eigen::Index>(pos_mod(dj, M1))) +=
          e.c;
    }
    fft2_inplace(arr, +1);
    return arr;
  };
  CArray fa = scatter(a);
  {
    CArray fb = scatter(b);
    fa *= fb.conjugate();
  }
  fft2_inplace(fa, -1);
  fa /= static_cast<double>(M1 * M2);

  double cmax = std::sqrt(fa.abs2().maxCoeff());
  double cut = 1e-14 * cmax;
  std::vector<SpectrumEntry> out;
  for (std::int64_t dm = P.m0; dm <= P.m1; ++dm)
    for (std::int64_t dj = P.j0; dj <= P.j1; ++dj) {
      auto c = fa(static_cast<Eigen::Index>(pos_mod(dm, M2)),
                  static_cast<Eigen::Index>(pos_mod(dj, M1)));
      if (std::abs(c) > cut) out.push_back({dj, fr.s * dj + dm, c});
    }
  return merge_spectrum(std::move(out));
}

double filtered_energy(const std::vector<SpectrumEntry>& spec, std::uint64_t R,
                       const Multiplier& mult) {
  double Rd = static_cast<double>(R);
  double acc = 0.0;
  for (const auto& e : spec) {
    double v = mult(static_cast<double>(e.k1) / Rd, static_cast<double>(e.k2) / Rd);
    acc += v * v * std::norm(e.c);
  }
  return acc * Rd * Rd;
}

double filtered_sup(const std::vector<SpectrumEntry>& spec, std::uint64_t R,
                    const Multiplier& mult, std::int64_t oversample) {
  auto kept = apply_multiplier(spec, R, mult);
  if (kept.empty()) return 0.0;
  std::int64_t M = pick_size(std::max<std::int64_t>(spectrum_span(kept), 8), oversample);
  return lattice_sup(kept, M);
}

CArray values_on_lattice(const std::vector<SpectrumEntry>& spec, std::int64_t M) {
  if (M < 1) throw std::invalid_argument("values_on_lattice: M must be positive");
  CArray arr = CArray::Zero(M, M);
  for (const auto& e : spec)
    arr(static_cast<Eigen::Index>(pos_mod(e.k2, M)), static_cast<Eigen::Index>(pos_mod(e.k1, M))) +=
        e.c;
  fft2_inplace(arr, +1);
  return arr;
}

double radial_bump_transform(double s, double rho) {
  if (!(s > 0.0)) throw std::invalid_argument("radial_bump_transform: scale must be positive");
  double a = 2.0 * kPi * std::fabs(rho) * std::sqrt(s);
  if (a < 1e-10) return 1.0;
  if (a > 600.0) return 0.0;
  // Hankel pair of the Matern-type profile: 18 int_0^inf u (1+u^2)^-10 J_0(au) du
  // = 18 (a/2)^9 K_9(a) / 9!
  return 18.0 * std::pow(0.5 * a, 9.0) * std::cyl_bessel_k(9.0, a) / 362880.0;
}

double plateau_abs_transform(double omega) {
  struct Table {
    std::vector<double> v;
    double dw = 0.0;
    double wmax = 0.0;
    Table() {
      const auto& g = filter_bank().profile();
      const std::int64_t n = std::int64_t{1} << 17;
      const double h = 1.0 / 1024.0;  // |g_hat| decays like exp(-c sqrt(x)); x <= 128 suffices
      std::vector<std::complex<double>> buf(static_cast<std::size_t>(n));
      for (std::int64_t j = 0; j < n; ++j)
        buf[static_cast<std::size_t>(j)] = std::fabs(g.hat(static_cast<double>(j) * h));
      double f0 = buf[0].real();
      fft_line_inplace(buf.data(), n, -1);
      v.resize(static_cast<std::size_t>(n / 2 + 1));
      // trapezoid cosine transform of the even extension, read off the DFT
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = 2.0 * h * buf[k].real() - h * f0;
      dw = 1.0 / (h * static_cast<double>(n));
      wmax = dw * static_cast<double>(v.size() - 1);
    }
  };
  static const Table tab;
  double w = std::fabs(omega);
  if (w >= tab.wmax - 2.0 * tab.dw) return 0.0;
  double u = w / tab.dw;
  auto i = static_cast<std::size_t>(std::floor(u));
  double t = u - static_cast<double>(i);
  // Catmull-Rom through four neighbors, even extension across omega = 0
  double pm1 = tab.v[i > 0 ? i - 1 : 1];
  double p0 = tab.v[i], p1 = tab.v[i + 1], p2 = tab.v[i + 2];
  return p0 +
         0.5 * t *
             (p1 - pm1 +
              t * (2.0 * pm1 - 5.0 * p0 + 4.0 * p1 - p2 + t * (3.0 * (p0 - p1) + p2 - pm1)));
}

Multiplier box_kernel_multiplier(double e1, double e2, double slope) {
  if (!(e1 > 0.0) || !(e2 > 0.0))
    throw std::invalid_argument("box_kernel_multiplier: extents must be positive");
  return [e1, e2, slope](double x1, double x2) {
    return plateau_abs_transform(x1 / e1) * plateau_abs_transform((x2 - slope * x1) / e2);
  };
}

SquareField square_field(const Cascade& c, Member kind, int m, int k, int i, const GridSpec& g) {
  if (g.R != c.R) throw std::invalid_argument("square_field: grid R mismatch");
  if (k < 0 || k > c.N()) throw std::invalid_argument("square_field: level out of range");
  if (i < 0 || i >= c.tree.level_of_count(k))
    throw std::invalid_argument("square_field: cap index out of range");
  auto range = c.tree.descendant_range(k, i, c.N());
  std::vector<SpectrumEntry> acc;
  for (int t = 0; t < static_cast<int>(c.stages.size()); ++t) {
    const auto& st = c.stages[static_cast<std::size_t>(t)];
    if (st.theta < range[0] || st.theta >= range[1]) continue;
    auto e = member_square_spectrum(c, kind, m, t);
    acc.insert(acc.end(), e.begin(), e.end());
  }
  SquareField out;
  out.level = k;
  out.cap_index = i;
  out.member = kind;
  out.grid = g;
  out.spectrum = merge_spectrum(std::move(acc));
  out.values = synthesize_spectrum(out.spectrum, g).values.real();
  return out;
}

double restricted_square_norm(const SquareField& sq, const PlateSpec& ps, int residue) {
  if (residue < 0 || residue >= ps.n_tiles)
    throw std::invalid_argument("restricted_square_norm: residue out of range");
  const GridSpec& g = sq.grid;
  if (g.R != ps.R) throw std::invalid_argument("restricted_square_norm: grid R mismatch");
  double sp = g.spacing();
  double Rd = static_cast<double>(ps.R);
  double sum = 0.0;
  for (Eigen::Index q = 0; q < sq.values.rows(); ++q) {
    double x2 = static_cast<double>(q) * sp;
    auto b = static_cast<std::int64_t>(std::floor(x2 / Rd + 0.5));
    // sheared tile coordinate advances linearly along the row
    double T1 = static_cast<double>(ps.M) * x2 / Rd;
    double step = sp / ps.L1;
    for (Eigen::Index p = 0; p < sq.values.cols(); ++p, T1 += step) {
      auto a = static_cast<std::int64_t>(std::floor(T1 + 0.5));
      if (ps.residue(a, b) == residue) sum += sq.values(q, p);
    }
  }
  return std::sqrt(std::max(sum, 0.0) * g.cell_area());
}

LemmaReport make_report(std::string lemma, std::uint64_t R, double lhs, double rhs,
                        double stated_power, double tolerance, double slack) {
  LemmaReport r;
  r.lemma = std::move(lemma);
  r.lhs = lhs;
  r.rhs = rhs;
  r.stated_power = stated_power;
  r.tolerance_factor = tolerance;
  r.slack = slack;
  double L = std::log2(static_cast<double>(R));
  if (rhs > 0.0)
    r.ratio = lhs / rhs;
  else
    r.ratio = lhs > 0.0 ? kInf : 0.0;
  r.vacuous = lhs == 0.0 && rhs == 0.0;
  r.log_exponent =
      (r.ratio > 0.0 && std::isfinite(r.ratio)) ? std::log(r.ratio) / std::log(L) : 0.0;
  r.pass = r.vacuous || r.ratio <= tolerance * std::pow(L, stated_power + slack);
  return r;
}

LemmaReport low_lemma_residual(const Cascade& c, int m, int k, int s, double r) {
  const int N = c.N();
  if (m < 2 || m > N || k < m) throw std::invalid_argument("low_lemma_residual: need 2 <= m <= k <= N");
  if (k > N) throw std::invalid_argument("low_lemma_residual: level out of range");
  if (s < 0 || s > k) throw std::invalid_argument("low_lemma_residual: need 0 <= s <= k");
  double Rk = c.ladder.scales[static_cast<std::size_t>(k)];
  if (!(r > 0.0) || r > 1.0 / Rk + 1e-12)
    throw std::invalid_argument("low_lemma_residual: need 0 < r <= 1/R_k");
  const auto& fb = filter_bank();
  const double Rd = static_cast<double>(c.R);
  const std::int64_t d = static_cast<std::int64_t>(std::ceil(2.0 * r * Rd)) + 1;

  int nk = c.tree.level_of_count(k);
  std::vector<std::vector<SpectrumEntry>> B(static_cast<std::size_t>(nk));
  for (int j = 0; j < nk; ++j)
    B[static_cast<std::size_t>(j)] = member_spectrum(c, Member::bad, m, k, j);

  Multiplier lo = [&fb, r](double x1, double x2) { return fb.low(r, x1, x2); };

  bool any = false;
  double worst = -1.0, wl = 0.0, wr = 0.0;
  int ns = c.tree.level_of_count(s);
  for (int is = 0; is < ns; ++is) {
    auto range = c.tree.descendant_range(s, is, k);
    std::vector<SpectrumEntry> acc;
    for (int j = range[0]; j < range[1]; ++j)
      acc.insert(acc.end(), B[static_cast<std::size_t>(j)].begin(),
                 B[static_cast<std::size_t>(j)].end());
    auto A = merge_spectrum(std::move(acc));
    if (A.empty()) continue;
    auto lhs = windowed_correlation(A, A, d, d);
    // near pairs inside tau_s; pairs that are not near sit beyond the filter
    // support, so this reproduces the full expansion of |f^B_{m,tau_s}|^2
    std::vector<SpectrumEntry> res = lhs;
    for (int j = range[0]; j < range[1]; ++j) {
      if (B[static_cast<std::size_t>(j)].empty()) continue;
      for (int j2 = range[0]; j2 < range[1]; ++j2) {
        if (B[static_cast<std::size_t>(j2)].empty()) continue;
        if (!are_near(c.tree.cap(k, j), c.tree.cap(k, j2), c.R)) continue;
        auto w = windowed_correlation(B[static_cast<std::size_t>(j)],
                                      B[static_cast<std::size_t>(j2)], d, d);
        for (auto& e : w) e.c = -e.c;
        res.insert(res.end(), w.begin(), w.end());
      }
    }
    res = merge_spectrum(std::move(res));
    auto lhs_f = apply_multiplier(lhs, c.R, lo);
    auto res_f = apply_multiplier(res, c.R, lo);
    std::int64_t span = std::max(spectrum_span(lhs_f), spectrum_span(res_f));
    std::int64_t M = pick_size(std::max<std::int64_t>(span, 8), 8);
    double den = lattice_sup(lhs_f, M);
    double num = lattice_sup(res_f, M);
    any = true;
    double ratio = den > 0.0 ? num / den : (num > 0.0 ? kInf : 0.0);
    if (ratio > worst) {
      worst = ratio;
      wl = num;
      wr = den;
    }
  }

  auto rep = make_report("low", c.R, wl, wr, 0.0, 1e-6, 0.0);
  if (!any) {
    rep.vacuous = true;
    rep.pass = true;
  }
  rep.params = {{"m", static_cast<double>(m)},
                {"k", static_cast<double>(k)},
                {"s", static_cast<double>(s)},
                {"r", r}};
  return rep;
}

LemmaReport high_lemma_ratio(const Cascade& c, char variant, int m, int k, int l) {
  const int N = c.N();
  if (m < 2 || m > N) throw std::invalid_argument("high_lemma_ratio: need 2 <= m <= N");
  const auto& fb = filter_bank();
  const double L = static_cast<double>(c.ladder.log2R);
  const double Rd = static_cast<double>(c.R);
  Multiplier unit = [](double, double) { return 1.0; };

  double lhs = 0.0, rhs = 0.0, stated = 0.0;
  if (variant == 'a') {
    if (k < 0 || k > N) throw std::invalid_argument("high_lemma_ratio: level out of range");
    double rc = c.ladder.scales[static_cast<std::size_t>(k)] / Rd;
    Multiplier hi = [&fb, rc](double x1, double x2) { return fb.high(rc, x1, x2); };
    int nk = c.tree.level_of_count(k);
    std::vector<SpectrumEntry> all;
    for (int i = 0; i < nk; ++i) {
      auto range = c.tree.descendant_range(k, i, N);
      std::vector<SpectrumEntry> bad_acc, pr_acc;
      for (int t = 0; t < static_cast<int>(c.stages.size()); ++t) {
        int theta = c.stages[static_cast<std::size_t>(t)].theta;
        if (theta < range[0] || theta >= range[1]) continue;
        auto eb = member_square_spectrum(c, Member::bad, m, t);
        bad_acc.insert(bad_acc.end(), eb.begin(), eb.end());
        auto ep = member_square_spectrum(c, Member::pruned, m, t);
        pr_acc.insert(pr_acc.end(), ep.begin(), ep.end());
      }
      all.insert(all.end(), bad_acc.begin(), bad_acc.end());
      rhs += filtered_energy(merge_spectrum(std::move(pr_acc)), c.R, hi);
    }
    lhs = filtered_energy(merge_spectrum(std::move(all)), c.R, hi);
    rhs *= L;
    stated = 1.0;
  } else if (variant == 'b') {
    if (k < 1 || k > N) throw std::invalid_argument("high_lemma_ratio: need 1 <= k <= N");
    double rc = 1.0 / c.ladder.scales[static_cast<std::size_t>(k)];
    Multiplier hi = [&fb, rc](double x1, double x2) { return fb.high(rc, x1, x2); };
    int nk = c.tree.level_of_count(k);
    std::vector<SpectrumEntry> all;
    for (int i = 0; i < nk; ++i) {
      auto spec = member_spectrum(c, Member::bad, m, k, i);
      if (spec.empty()) continue;
      auto sq = square_spectrum(spec, c.R, cap_frame(c.tree.cap(k, i), c.R));
      all.insert(all.end(), sq.begin(), sq.end());
      rhs += filtered_energy(sq, c.R, unit);
    }
    lhs = filtered_energy(merge_spectrum(std::move(all)), c.R, hi);
    rhs *= L;
    stated = 1.0;
  } else if (variant == 'c') {
    if (k < 0 || l < 0 || k + l > N)
      throw std::invalid_argument("high_lemma_ratio: need k, l >= 0 and k + l <= N");
    double rc = 1.0 / c.ladder.scales[static_cast<std::size_t>(k + l)];
    Multiplier hi = [&fb, rc](double x1, double x2) { return fb.high(rc, x1, x2); };
    int nk = c.tree.level_of_count(k);
    auto near = near_lists(c.tree, k, c.R, 1.0);
    std::vector<std::vector<SpectrumEntry>> A(static_cast<std::size_t>(nk));
    for (int i = 0; i < nk; ++i)
      A[static_cast<std::size_t>(i)] = member_spectrum(c, Member::bad, m, k, i);
    std::vector<SpectrumEntry> G;
    for (int i = 0; i < nk; ++i) {
      if (A[static_cast<std::size_t>(i)].empty()) continue;
      CapFrame fr = cap_frame(c.tree.cap(k, i), c.R);
      std::vector<SpectrumEntry> nf;
      for (int j : near[static_cast<std::size_t>(i)])
        nf.insert(nf.end(), A[static_cast<std::size_t>(j)].begin(),
                  A[static_cast<std::size_t>(j)].end());
      auto F = merge_spectrum(std::move(nf));
      if (!F.empty()) {
        auto P = product_spectrum(A[static_cast<std::size_t>(i)], F, c.R, fr);
        G.insert(G.end(), P.begin(), P.end());
      }
      rhs += filtered_energy(square_spectrum(A[static_cast<std::size_t>(i)], c.R, fr), c.R, unit);
    }
    lhs = filtered_energy(merge_spectrum(std::move(G)), c.R, hi);
    rhs *= std::pow(L, static_cast<double>(l + 3));
    stated = static_cast<double>(l + 3);
  } else {
    throw std::invalid_argument("high_lemma_ratio: variant must be one of a, b, c");
  }

  auto rep = make_report(std::string("high-") + variant, c.R, lhs, rhs, stated);
  rep.params = {{"m", static_cast<double>(m)},
                {"k", static_cast<double>(k)},
                {"l", variant == 'c' ? static_cast<double>(l) : 0.0}};
  return rep;
}

LemmaReport constancy_ratio(const Cascade& c, ConstancyKind kind, const ConstancyParams& prm) {
  const int N = c.N();
  const double L = static_cast<double>(c.ladder.log2R);
  const double Rd = static_cast<double>(c.R);
  const auto& fb = filter_bank();

  if (kind == ConstancyKind::pointwise_theta) {
    int t = -1;
    for (int u = 0; u < static_cast<int>(c.stages.size()); ++u)
      if (c.stages[static_cast<std::size_t>(u)].theta == prm.cap) t = u;
    if (t < 0)
      throw std::invalid_argument("constancy_ratio: ground cap inactive or out of range");
    const auto& st = c.stages[static_cast<std::size_t>(t)];
    auto spec = field_spectrum(modulus_squared(st.unpruned), corr_box(st.raw_box), 0.0);
    const auto& ps = c.plates[static_cast<std::size_t>(N)][static_cast<std::size_t>(prm.cap)];
    double e1 = c.tree.cap(N, prm.cap).width().value();
    auto mult = box_kernel_multiplier(e1, 4.0 / Rd, ps.slope());
    auto nr = worst_node_ratio(spec, c.R, mult);
    auto rep = make_report("const-pointwise-theta", c.R, nr.lhs, nr.rhs, 0.0);
    rep.vacuous = nr.vacuous;
    if (nr.vacuous) rep.pass = true;
    rep.params = {{"cap", static_cast<double>(prm.cap)}};
    return rep;
  }

  if (kind == ConstancyKind::pointwise_tau) {
    if (prm.k < 1 || prm.k > N) throw std::invalid_argument("constancy_ratio: level out of range");
    if (prm.m < 1 || prm.m > N) throw std::invalid_argument("constancy_ratio: stage out of range");
    if (prm.cap < 0 || prm.cap >= c.tree.level_of_count(prm.k))
      throw std::invalid_argument("constancy_ratio: cap index out of range");
    auto spec = member_spectrum(c, Member::pruned, prm.m, prm.k, prm.cap);
    auto sq = square_spectrum(spec, c.R, cap_frame(c.tree.cap(prm.k, prm.cap), c.R));
    double s = c.ladder.scales[static_cast<std::size_t>(prm.k)];
    Multiplier mult = [s](double x1, double x2) {
      return radial_bump_transform(s, std::hypot(x1, x2));
    };
    auto nr = worst_node_ratio(sq, c.R, mult);
    auto rep = make_report("const-pointwise-tau", c.R, nr.lhs, nr.rhs, 0.0);
    rep.vacuous = nr.vacuous;
    if (nr.vacuous) rep.pass = true;
    rep.params = {{"m", static_cast<double>(prm.m)},
                  {"k", static_cast<double>(prm.k)},
                  {"cap", static_cast<double>(prm.cap)}};
    return rep;
  }

  // integrated variants share the bad square sum over theta inside tau_k
  if (prm.k < 1 || prm.k > N) throw std::invalid_argument("constancy_ratio: level out of range");
  if (prm.m < 2 || prm.m > N) throw std::invalid_argument("constancy_ratio: need 2 <= m <= N");
  if (prm.cap < 0 || prm.cap >= c.tree.level_of_count(prm.k))
    throw std::invalid_argument("constancy_ratio: cap index out of range");
  auto range = c.tree.descendant_range(prm.k, prm.cap, N);
  std::vector<SpectrumEntry> acc;
  for (int t = 0; t < static_cast<int>(c.stages.size()); ++t) {
    int theta = c.stages[static_cast<std::size_t>(t)].theta;
    if (theta < range[0] || theta >= range[1]) continue;
    auto e = member_square_spectrum(c, Member::bad, prm.m, t);
    acc.insert(acc.end(), e.begin(), e.end());
  }
  auto gsum = merge_spectrum(std::move(acc));
  const auto& ps = c.plates[static_cast<std::size_t>(prm.k)][static_cast<std::size_t>(prm.cap)];
  double l3 = L * L * L;
  auto rho_mult =
      box_kernel_multiplier(l3 * static_cast<double>(ps.n_tiles) / Rd, l3 / Rd, ps.slope());

  if (kind == ConstancyKind::integrated_a) {
    double hyp = (prm.appendix_hypothesis ? 0.5 : 2.0) *
                 scale_extended(c.ladder, prm.k + 3) / Rd;
    if (!(prm.r > 0.0) || prm.r > hyp * (1.0 + 1e-12))
      throw std::invalid_argument("constancy_ratio: band radius violates the hypothesis");
    Multiplier band = [&fb, r = prm.r](double x1, double x2) { return fb.band(r, x1, x2); };
    double lhs = filtered_energy(gsum, c.R, band);
    double core = filtered_energy(gsum, c.R, rho_mult);
    double stated = prm.appendix_hypothesis ? 0.0 : 1.0;
    double rhs = std::pow(L, stated) * core;
    auto rep = make_report("const-integrated-a", c.R, lhs, rhs, stated);
    rep.params = {{"m", static_cast<double>(prm.m)},
                  {"k", static_cast<double>(prm.k)},
                  {"cap", static_cast<double>(prm.cap)},
                  {"r", prm.r},
                  {"appendix", prm.appendix_hypothesis ? 1.0 : 0.0}};
    return rep;
  }

  if (prm.k < prm.m) throw std::invalid_argument("constancy_ratio: integrated_b needs k >= m");
  double lhs = filtered_energy(gsum, c.R, rho_mult);
  auto avgs = unpruned_tile_averages(c, prm.k, prm.cap);
  const auto& member =
      c.gauge[static_cast<std::size_t>(prm.k)][static_cast<std::size_t>(prm.cap)];
  double core = 0.0;
  for (std::size_t rho = 0; rho < member.size(); ++rho)
    if (member[rho]) core += ps.area() * avgs[rho] * avgs[rho];
  double rhs = L * core;
  auto rep = make_report("const-integrated-b", c.R, lhs, rhs, 1.0);
  rep.params = {{"m", static_cast<double>(prm.m)},
                {"k", static_cast<double>(prm.k)},
                {"cap", static_cast<double>(prm.cap)}};
  return rep;
}

LemmaReport weak_high_domination(const Cascade& c, int m, int k, char part, double kappa,
                                 double kappa_prime) {
  const int N = c.N();
  if (m < 2 || m > N || k < 0 || k >= m)
    throw std::invalid_argument("weak_high_domination: need 2 <= m <= N and 0 <= k < m");
  if (part != 'a' && part != 'b')
    throw std::invalid_argument("weak_high_domination: part must be a or b");
  const double L = static_cast<double>(c.ladder.log2R);
  const double Rd = static_cast<double>(c.R);
  const auto& fb = filter_bank();
  double r_split = c.ladder.scales[static_cast<std::size_t>(m - 1)] / Rd;
  Multiplier lo = [&fb, r_split](double x1, double x2) { return fb.low(r_split, x1, x2); };

  // per-cap square spectra of the bad parts one level below m
  int n_lo = c.tree.level_of_count(m - 1);
  std::vector<std::vector<SpectrumEntry>> Sq(static_cast<std::size_t>(n_lo));
  for (int j = 0; j < n_lo; ++j) {
    auto spec = member_spectrum(c, Member::bad, m, m - 1, j);
    if (!spec.empty())
      Sq[static_cast<std::size_t>(j)] =
          square_spectrum(spec, c.R, cap_frame(c.tree.cap(m - 1, j), c.R));
  }
  auto act = level_activity(c, m - 1);
  // denominators use the same active-cap counts the cascade thresholds used
  double n_act = static_cast<double>(c.active_count[static_cast<std::size_t>(m - 1)]);
  double alpha = c.cfg.alpha;

  int nk = c.tree.level_of_count(k);
  if (part == 'a') {
    bool any = false;
    double worst = -1.0, wl = 0.0, wr = 0.0;
    for (int i = 0; i < nk; ++i) {
      auto range = c.tree.descendant_range(k, i, m - 1);
      std::vector<SpectrumEntry> acc;
      double cnt_in = 0.0;
      for (int j = range[0]; j < range[1]; ++j) {
        acc.insert(acc.end(), Sq[static_cast<std::size_t>(j)].begin(),
                   Sq[static_cast<std::size_t>(j)].end());
        cnt_in += act[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
      }
      auto S = merge_spectrum(std::move(acc));
      if (S.empty() || cnt_in == 0.0 || n_act == 0.0) continue;
      double lhs_i = filtered_sup(S, c.R, lo, 8);
      double rhs_i = alpha * alpha * cnt_in / (c.cfg.Cp * L * L * n_act * n_act);
      any = true;
      double ratio = lhs_i / rhs_i;
      if (ratio > worst) {
        worst = ratio;
        wl = lhs_i;
        wr = rhs_i;
      }
    }
    auto rep = make_report("whd-a", c.R, wl, wr, 0.0);
    if (!any) {
      rep.vacuous = true;
      rep.pass = true;
    }
    rep.params = {{"m", static_cast<double>(m)}, {"k", static_cast<double>(k)}};
    return rep;
  }

  const std::int64_t Mn = 256;
  bool qual = false;
  double worst = -1.0, wl = 0.0, wr = 0.0;
  for (int i = 0; i < nk; ++i) {
    auto range = c.tree.descendant_range(k, i, m - 1);
    std::vector<SpectrumEntry> acc;
    for (int j = range[0]; j < range[1]; ++j)
      acc.insert(acc.end(), Sq[static_cast<std::size_t>(j)].begin(),
                 Sq[static_cast<std::size_t>(j)].end());
    auto S = merge_spectrum(std::move(acc));
    if (S.empty()) continue;
    auto fk = member_spectrum(c, Member::bad, m, k, i);
    if (fk.empty()) continue;
    CArray sv = values_on_lattice(S, Mn);
    CArray lv = values_on_lattice(apply_multiplier(S, c.R, lo), Mn);
    CArray fv = values_on_lattice(fk, Mn);
    for (Eigen::Index q = 0; q < Mn; ++q)
      for (Eigen::Index p = 0; p < Mn; ++p) {
        if (alpha > kappa * L * std::abs(fv(q, p))) continue;
        qual = true;
        double Sx = std::max(sv(q, p).real(), 0.0);
        double Hx = std::abs(sv(q, p) - lv(q, p));
        double ratio = Hx > 0.0 ? Sx / Hx : (Sx > 0.0 ? kInf : 0.0);
        if (ratio > worst) {
          worst = ratio;
          wl = Sx;
          wr = Hx;
        }
      }
  }
  auto rep = make_report("whd-b", c.R, wl, wr, 0.0, kappa_prime, 0.0);
  if (!qual) {
    rep.vacuous = true;
    rep.pass = true;
  }
  rep.params = {{"m", static_cast<double>(m)},
                {"k", static_cast<double>(k)},
                {"kappa", kappa},
                {"kappa_prime", kappa_prime}};
  return rep;
}

DichotomyTable::DichotomyTable(const Cascade& c, int m, std::int64_t nodes_per_axis, double kappa)
    : tree_(&c.tree),
      R_(c.R),
      M_(nodes_per_axis),
      N_(c.N()),
      kappa_(kappa),
      log2R_(static_cast<double>(c.ladder.log2R)) {
  if (m < 2 || m > N_) throw std::invalid_argument("DichotomyTable: need 2 <= m <= N");
  if (M_ < 1) throw std::invalid_argument("DichotomyTable: need at least one node per axis");
  values_.resize(static_cast<std::size_t>(N_) + 1);
  int ng = tree_->level_of_count(N_);
  values_[static_cast<std::size_t>(N_)].assign(static_cast<std::size_t>(ng),
                                               CArray::Zero(M_, M_));
  for (int t = 0; t < static_cast<int>(c.stages.size()); ++t) {
    const auto& st = c.stages[static_cast<std::size_t>(t)];
    auto spec = field_spectrum(c.bad_part(m, t), c.bad_box(m, t), 0.0);
    values_[static_cast<std::size_t>(N_)][static_cast<std::size_t>(st.theta)] =
        values_on_lattice(spec, M_);
  }
  for (int l = N_ - 1; l >= 0; --l) {
    int nl = tree_->level_of_count(l);
    auto& row = values_[static_cast<std::size_t>(l)];
    row.assign(static_cast<std::size_t>(nl), CArray::Zero(M_, M_));
    for (int i = 0; i < nl; ++i) {
      auto cr = tree_->child_range[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)];
      for (int u = cr[0]; u < cr[1]; ++u)
        row[static_cast<std::size_t>(i)] +=
            values_[static_cast<std::size_t>(l) + 1][static_cast<std::size_t>(u)];
    }
  }
  near_.resize(static_cast<std::size_t>(N_) + 1);
  for (int l = 0; l <= N_; ++l) near_[static_cast<std::size_t>(l)] = near_lists(*tree_, l, R_, kappa_);
}

std::vector<LevelVerdict> DichotomyTable::classify_point(std::int64_t ix, std::int64_t iy) const {
  if (ix < 0 || ix >= M_ || iy < 0 || iy >= M_)
    throw std::invalid_argument("classify_point: node out of range");
  std::vector<LevelVerdict> out;
  auto qx = static_cast<Eigen::Index>(iy);
  auto px = static_cast<Eigen::Index>(ix);
  double l3 = log2R_ * log2R_ * log2R_;
  for (int k = 0; k < N_; ++k) {
    int nl = tree_->level_of_count(k);
    const auto& child = values_[static_cast<std::size_t>(k) + 1];
    const auto& near = near_[static_cast<std::size_t>(k) + 1];
    for (int i = 0; i < nl; ++i) {
      LevelVerdict v;
      v.k = k;
      v.cap = i;
      v.lhs = std::abs(values_[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)](qx, px));
      auto cr = tree_->child_range[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      double bb = 0.0;
      for (int u = cr[0]; u < cr[1]; ++u) {
        double au = std::abs(child[static_cast<std::size_t>(u)](qx, px));
        const auto& nu = near[static_cast<std::size_t>(u)];
        for (int w = u + 1; w < cr[1]; ++w) {
          if (std::binary_search(nu.begin(), nu.end(), w)) continue;
          bb = std::max(bb, std::sqrt(au * std::abs(child[static_cast<std::size_t>(w)](qx, px))));
        }
      }
      v.broad_rhs = l3 * bb;
      double nb = 0.0;
      for (int u = cr[0]; u < cr[1]; ++u) {
        std::complex<double> sum = 0.0;
        for (int w : near[static_cast<std::size_t>(u)])
          if (w >= cr[0] && w < cr[1]) sum += child[static_cast<std::size_t>(w)](qx, px);
        nb = std::max(nb, std::abs(sum));
      }
      v.narrow_rhs = (1.0 + 1.0 / log2R_) * nb;
      v.broad = v.lhs <= v.broad_rhs;
      v.narrow = v.lhs <= v.narrow_rhs;
      out.push_back(v);
    }
  }
  return out;
}

DichotomyScan dichotomy_scan(const Cascade& c, int m, std::int64_t nodes_per_axis, double kappa) {
  DichotomyTable tab(c, m, nodes_per_axis, kappa);
  DichotomyScan sc;
  std::int64_t M = tab.nodes_per_axis();
  sc.nodes = M * M;
  double worst = kInf;
  for (std::int64_t iy = 0; iy < M; ++iy)
    for (std::int64_t ix = 0; ix < M; ++ix) {
      auto verdicts = tab.classify_point(ix, iy);
      for (const auto& v : verdicts) {
        ++sc.checks;
        if (!v.broad && !v.narrow) ++sc.violations;
        if (v.lhs > 0.0) worst = std::min(worst, std::max(v.broad_rhs, v.narrow_rhs) / v.lhs);
      }
    }
  sc.worst_margin = std::isfinite(worst) ? worst : 0.0;
  return sc;
}

LemmaReport bilinear_ratio(const FrequencyProfile& f, const Cap& tau, const Cap& tau_prime,
                           double E, double alpha, double S, int sigma) {
  validate_profile(f);
  if (!(S >= 4.0)) throw std::invalid_argument("bilinear_ratio: need S >= 4");
  if (!(E <= 0.5 + 1e-12) || !(E + 1e-12 >= 1.0 / std::sqrt(S)))
    throw std::invalid_argument("bilinear_ratio: need S^-1/2 <= E <= 1/2");
  if (!(alpha >= 0.0)) throw std::invalid_argument("bilinear_ratio: alpha must be nonnegative");
  double gap = std::max((tau_prime.lo - tau.hi).value(), (tau.lo - tau_prime.hi).value());
  if (gap + 1e-12 < E) throw std::invalid_argument("bilinear_ratio: caps are not E-separated");

  auto ladder = build_scale_ladder(f.R);
  auto tree = build_cap_tree(ladder);
  // caps omega: the tree level whose width is closest to S^-1/2
  int kw = 0;
  double best = kInf;
  for (int k = 0; k <= ladder.N; ++k) {
    double wk = 2.0 / static_cast<double>(tree.level_of_count(k));
    double dev = std::fabs(std::log(wk * std::sqrt(S)));
    if (dev < best) {
      best = dev;
      kw = k;
    }
  }

  GridSpec g = make_grid(f.R, sigma);
  double thr = alpha * alpha * alpha * alpha;
  double lhs = 0.0;
  CArray ind = CArray::Zero(g.M, g.M);
  {
    SampledField ft = synthesize(cap_component(f, tau), g);
    SampledField fp = synthesize(cap_component(f, tau_prime), g);
    for (Eigen::Index q = 0; q < g.M; ++q)
      for (Eigen::Index p = 0; p < g.M; ++p) {
        double v = std::norm(ft.values(q, p)) * std::norm(fp.values(q, p));
        if (v > thr) {
          lhs += v;
          ind(q, p) = 1.0;
        }
      }
    lhs *= g.cell_area();
  }

  double Rd = static_cast<double>(f.R);
  CArray scatter = CArray::Zero(g.M, g.M);
  for (const auto& omega : tree.levels[static_cast<std::size_t>(kw)]) {
    FrequencyProfile sub = cap_component(f, omega);
    if (sub.entries.empty()) continue;
    CapFrame fr = cap_frame(omega, f.R);
    SpectralBox box = profile_box(sub, fr);
    ModulatedField fld =
        sample_field(sub, fr, pick_size(box.width(), 2), pick_size(box.height(), 2));
    auto spec = field_spectrum(modulus_squared(fld), corr_box(box), 0.0);
    for (auto& e : spec)
      e.c *= radial_bump_transform(std::sqrt(S),
                                   std::hypot(static_cast<double>(e.k1),
                                              static_cast<double>(e.k2)) / Rd);
    accumulate_spectrum(scatter, spec);
  }
  fft2_inplace(scatter, +1);  // scatter now holds sum_omega |f_omega|^2 * w_sqrt(S)

  // dilate the superlevel set by sqrt(S) via a wrapped disk convolution
  double rad = std::sqrt(S) * static_cast<double>(sigma);
  CArray disk = CArray::Zero(g.M, g.M);
  auto irad = static_cast<std::int64_t>(std::floor(rad));
  for (std::int64_t dy = -irad; dy <= irad; ++dy)
    for (std::int64_t dx = -irad; dx <= irad; ++dx)
      if (static_cast<double>(dx * dx + dy * dy) <= rad * rad)
        disk(static_cast<Eigen::Index>(pos_mod(dy, g.M)),
             static_cast<Eigen::Index>(pos_mod(dx, g.M))) = 1.0;
  fft2_inplace(ind, -1);
  fft2_inplace(disk, -1);
  ind *= disk;
  fft2_inplace(ind, +1);
  ind /= static_cast<double>(g.M) * static_cast<double>(g.M);

  double rhs = 0.0;
  for (Eigen::Index q = 0; q < g.M; ++q)
    for (Eigen::Index p = 0; p < g.M; ++p)
      if (ind(q, p).real() > 0.5) rhs += std::norm(scatter(q, p));
  rhs *= g.cell_area() / (E * E);

  auto rep = make_report("bilinear", f.R, lhs, rhs, 0.0);
  rep.params = {{"S", S},
                {"E", E},
                {"alpha", alpha},
                {"level", static_cast<double>(kw)},
                {"sigma", static_cast<double>(sigma)}};
  return rep;
}

}  // namespace dcpl
