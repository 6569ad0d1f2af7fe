#include "dcpl/modfield.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dcpl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::int64_t pos_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

std::complex<double> unit_phase(std::int64_t num, std::int64_t den) {
  // e(num/den) with the argument reduced exactly in integers
  return std::polar(1.0, kTwoPi * static_cast<double>(pos_mod(num, den)) /
                             static_cast<double>(den));
}

}  // namespace

CapFrame cap_frame(const Cap& cap, std::uint64_t R) {
  double c = cap.center().value();
  double Rd = static_cast<double>(R);
  CapFrame fr;
  fr.jc = std::llround(c * Rd);
  fr.mc = std::llround(static_cast<double>(fr.jc) * static_cast<double>(fr.jc) / Rd);
  fr.s = std::llround(2.0 * c);
  return fr;
}

SpectralBox box_union(const SpectralBox& a, const SpectralBox& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return {std::min(a.j0, b.j0), std::max(a.j1, b.j1), std::min(a.m0, b.m0),
          std::max(a.m1, b.m1)};
}

SpectralBox box_sum(const SpectralBox& a, const SpectralBox& b) {
  if (a.empty() || b.empty()) return {};
  return {a.j0 + b.j0, a.j1 + b.j1, a.m0 + b.m0, a.m1 + b.m1};
}

SpectralBox box_scale(const SpectralBox& a, int times) {
  if (times < 1) throw std::invalid_argument("box_scale: times must be >= 1");
  SpectralBox out = a;
  for (int i = 1; i < times; ++i) out = box_sum(out, a);
  return out;
}

SpectralBox profile_box(const FrequencyProfile& p, const CapFrame& fr) {
  SpectralBox box;
  for (const auto& e : p.entries) {
    std::int64_t dj = e.j - fr.jc;
    std::int64_t dm = e.m - fr.mc - fr.s * dj;
    if (box.empty()) {
      box = {dj, dj, dm, dm};
    } else {
      box.j0 = std::min(box.j0, dj);
      box.j1 = std::max(box.j1, dj);
      box.m0 = std::min(box.m0, dm);
      box.m1 = std::max(box.m1, dm);
    }
  }
  return box;
}

SpectralBox mask_margin(const PlateSpec& ps, const CapFrame& fr) {
  // mask modes satisfy |k1| <= n and |k2 - (M/n) k1| <= 1; in frame
  // coordinates dm' = k2 - s k1 this is a slab of slope M/n - s
  std::int64_t n = ps.n_tiles;
  double d = ps.slope() - static_cast<double>(fr.s);
  double reach = std::abs(d) * static_cast<double>(n) + 1.0;
  auto m = static_cast<std::int64_t>(std::ceil(reach));
  return {-n, n, -m, m};
}

std::int64_t pick_size(std::int64_t extent, std::int64_t oversample) {
  std::int64_t want = std::max<std::int64_t>(extent * oversample, 8);
  return static_cast<std::int64_t>(std::bit_ceil(static_cast<std::uint64_t>(want)));
}

ModulatedField sample_field(const FrequencyProfile& p, const CapFrame& fr, std::int64_t M1,
                            std::int64_t M2) {
  if (M1 < 1 || M2 < 1 || (M1 & (M1 - 1)) != 0 || (M2 & (M2 - 1)) != 0)
    throw std::invalid_argument("sample_field: sizes must be powers of two");
  SpectralBox box = profile_box(p, fr);
  if (!box.empty() && (box.width() > M1 || box.height() > M2))
    throw std::invalid_argument("sample_field: spectrum does not fit the subgrid");
  ModulatedField f;
  f.R = p.R;
  f.frame = fr;
  f.M1 = M1;
  f.M2 = M2;
  f.values = CArray::Zero(static_cast<Eigen::Index>(M2), static_cast<Eigen::Index>(M1));
  for (const auto& e : p.entries) {
    std::int64_t dj = e.j - fr.jc;
    std::int64_t dm = e.m - fr.mc - fr.s * dj;
    f.values(static_cast<Eigen::Index>(pos_mod(dm, M2)),
             static_cast<Eigen::Index>(pos_mod(dj, M1))) += e.a;
  }
  fft2_inplace(f.values, +1);
  // restore the carrier: phase factors are exactly periodic on the subgrid
  std::vector<std::complex<double>> colph(static_cast<std::size_t>(M1));
  for (std::int64_t pcol = 0; pcol < M1; ++pcol)
    colph[static_cast<std::size_t>(pcol)] = unit_phase(fr.jc * pcol, M1);
  std::int64_t mrow = fr.mc - fr.jc * fr.s;
  for (std::int64_t q = 0; q < M2; ++q) {
    std::complex<double> rowph = unit_phase(mrow * q, M2);
    for (std::int64_t pcol = 0; pcol < M1; ++pcol)
      f.values(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(pcol)) *=
          rowph * colph[static_cast<std::size_t>(pcol)];
  }
  return f;
}

double sup_norm(const ModulatedField& f) { return std::sqrt(f.values.abs2().maxCoeff()); }

void multiply_mask_inplace(ModulatedField& f, const TileMask& mask) {
  if (mask.all()) return;
  for (std::int64_t q = 0; q < f.M2; ++q) {
    double xx2 = f.x2(q);
    for (std::int64_t p = 0; p < f.M1; ++p)
      f.values(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) *=
          mask.value(f.x1(p, q), xx2);
  }
}

void multiply_mask_complement_inplace(ModulatedField& f, const TileMask& mask) {
  if (mask.none()) return;
  if (mask.all()) {
    f.values.setZero();
    return;
  }
  for (std::int64_t q = 0; q < f.M2; ++q) {
    double xx2 = f.x2(q);
    for (std::int64_t p = 0; p < f.M1; ++p)
      f.values(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) *=
          1.0 - mask.value(f.x1(p, q), xx2);
  }
}

ModulatedField modulus_squared(const ModulatedField& f) {
  ModulatedField out;
  out.R = f.R;
  out.frame = {0, 0, f.frame.s};
  out.M1 = f.M1;
  out.M2 = f.M2;
  out.values = f.values.abs2().cast<std::complex<double>>();
  return out;
}

std::vector<SpectrumEntry> field_spectrum(const ModulatedField& f, double drop_tol) {
  SpectralBox centered{-f.M1 / 2, f.M1 - f.M1 / 2 - 1, -f.M2 / 2, f.M2 - f.M2 / 2 - 1};
  return field_spectrum(f, centered, drop_tol);
}

std::vector<SpectrumEntry> field_spectrum(const ModulatedField& f, const SpectralBox& box,
                                          double drop_tol) {
  if (box.width() > f.M1 || box.height() > f.M2)
    throw std::invalid_argument("field_spectrum: unfold box larger than the subgrid");
  CArray a = f.values;
  std::vector<std::complex<double>> colph(static_cast<std::size_t>(f.M1));
  for (std::int64_t pcol = 0; pcol < f.M1; ++pcol)
    colph[static_cast<std::size_t>(pcol)] = std::conj(unit_phase(f.frame.jc * pcol, f.M1));
  std::int64_t mrow = f.frame.mc - f.frame.jc * f.frame.s;
  for (std::int64_t q = 0; q < f.M2; ++q) {
    std::complex<double> rowph = std::conj(unit_phase(mrow * q, f.M2));
    for (std::int64_t pcol = 0; pcol < f.M1; ++pcol)
      a(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(pcol)) *=
          rowph * colph[static_cast<std::size_t>(pcol)];
  }
  fft2_inplace(a, -1);
  double scale = 1.0 / (static_cast<double>(f.M1) * static_cast<double>(f.M2));
  double maxc = std::sqrt(a.abs2().maxCoeff()) * scale;
  double cut = drop_tol > 0.0 ? drop_tol * maxc : 0.0;
  std::vector<SpectrumEntry> out;
  for (std::int64_t r = 0; r < f.M2; ++r) {
    std::int64_t dm = box.m0 + pos_mod(r - box.m0, f.M2);
    for (std::int64_t ccol = 0; ccol < f.M1; ++ccol) {
      std::complex<double> v =
          a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(ccol)) * scale;
      if (std::abs(v) <= cut || v == std::complex<double>(0.0, 0.0)) continue;
      std::int64_t dj = box.j0 + pos_mod(ccol - box.j0, f.M1);
      out.push_back({f.frame.jc + dj, f.frame.mc + f.frame.s * dj + dm, v});
    }
  }
  std::sort(out.begin(), out.end(), [](const SpectrumEntry& x, const SpectrumEntry& y) {
    return x.k1 < y.k1 || (x.k1 == y.k1 && x.k2 < y.k2);
  });
  return out;
}

SampledField synthesize_spectrum(const std::vector<SpectrumEntry>& spec, const GridSpec& g) {
  SampledField f;
  f.grid = g;
  f.values = CArray::Zero(g.M, g.M);
  accumulate_spectrum(f.values, spec);
  fft2_inplace(f.values, +1);
  return f;
}

void accumulate_spectrum(CArray& scatter, const std::vector<SpectrumEntry>& spec) {
  if (scatter.rows() != scatter.cols())
    throw std::invalid_argument("accumulate_spectrum: scatter array must be square");
  auto M = static_cast<std::int64_t>(scatter.rows());
  for (const auto& e : spec)
    scatter(static_cast<Eigen::Index>(pos_mod(e.k2, M)),
            static_cast<Eigen::Index>(pos_mod(e.k1, M))) += e.c;
}

std::vector<double> tile_weighted_integrals(const ModulatedField& g, const PlateSpec& ps) {
  const double wcut = 1.3;  // W < 3e-39 outside |t| <= 1.3
  std::int64_t n = ps.n_tiles;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  double nd = static_cast<double>(n);
  double cshear = (static_cast<double>(ps.M) - nd * static_cast<double>(g.frame.s)) /
                  static_cast<double>(g.M2);
  auto qlo = static_cast<std::int64_t>(std::ceil(-wcut * static_cast<double>(g.M2)));
  auto qhi = static_cast<std::int64_t>(std::floor(wcut * static_cast<double>(g.M2)));
  for (std::int64_t q = qlo; q <= qhi; ++q) {
    double t2 = static_cast<double>(q) / static_cast<double>(g.M2);
    double w2 = poly_weight_1d(t2);
    auto row = static_cast<Eigen::Index>(pos_mod(q, g.M2));
    double base = cshear * static_cast<double>(q);
    for (std::int64_t rho = 0; rho < n; ++rho) {
      double lo = (static_cast<double>(rho) - wcut - base) * static_cast<double>(g.M1) / nd;
      double hi = (static_cast<double>(rho) + wcut - base) * static_cast<double>(g.M1) / nd;
      double acc = 0.0;
      for (auto p = static_cast<std::int64_t>(std::ceil(lo));
           p <= static_cast<std::int64_t>(std::floor(hi)); ++p) {
        double t1 = nd * static_cast<double>(p) / static_cast<double>(g.M1) + base -
                    static_cast<double>(rho);
        acc += poly_weight_1d(t1) *
               g.values(row, static_cast<Eigen::Index>(pos_mod(p, g.M1))).real();
      }
      out[static_cast<std::size_t>(rho)] += w2 * acc;
    }
  }
  double cell = g.cell_area();
  for (auto& v : out) v *= cell;
  return out;
}

std::vector<std::complex<double>> tile_sharp_integrals(const std::vector<SpectrumEntry>& spec,
                                                       const PlateSpec& ps) {
  std::int64_t n = ps.n_tiles;
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n), {0.0, 0.0});
  double nd = static_cast<double>(n);
  auto sinc = [](double y) {
    double z = std::numbers::pi * y;
    if (std::abs(z) < 1e-8) return 1.0 - z * z / 6.0;
    return std::sin(z) / z;
  };
  for (const auto& e : spec) {
    double k1 = static_cast<double>(e.k1), k2 = static_cast<double>(e.k2);
    double sc = sinc(k1 / nd) * sinc(k2 - static_cast<double>(ps.M) * k1 / nd);
    if (sc == 0.0) continue;
    // phase at the residue-0 tile center (0, 0) is 1; ladder steps by
    // e(nu . u) = e(k1 / n) per residue
    std::complex<double> term = e.c * sc;
    std::complex<double> step = unit_phase(e.k1, n);
    // exact phase at rho=0: center (0,0) => e(0)
    std::complex<double> ph(1.0, 0.0);
    for (std::int64_t rho = 0; rho < n; ++rho) {
      out[static_cast<std::size_t>(rho)] += term * ph;
      ph *= step;
    }
  }
  double area = ps.area();
  for (auto& v : out) v *= area;
  return out;
}

double lp_norm_exact_even_sub(const FrequencyProfile& sub, const CapFrame& fr, int pexp) {
  if (pexp < 2 || pexp % 2 != 0)
    throw std::invalid_argument("lp_norm_exact_even_sub: p must be a positive even integer");
  SpectralBox box = profile_box(sub, fr);
  if (box.empty()) return 0.0;
  std::int64_t M1 = pick_size(pexp * (box.width() - 1) + 1);
  std::int64_t M2 = pick_size(pexp * (box.height() - 1) + 1);
  ModulatedField f = sample_field(sub, fr, M1, M2);
  double half = pexp / 2.0;
  double s = f.values.abs2().pow(half).sum();
  return std::pow(s * f.cell_area(), 1.0 / pexp);
}

}  // namespace dcpl
