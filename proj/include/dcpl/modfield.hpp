#pragma once
// Cap-frame subgrid fields: each cap component is demodulated by an integer
// carrier and an integer shear, sampled on a small sheared subgrid whose
// points all lie on the standard grid. Integer frame maps keep products,
// masks, spectra and quadrature exact as long as the spectral boxes fit.

#include <complex>
#include <cstdint>
#include <vector>

#include "dcpl/cutoffs.hpp"
#include "dcpl/geom.hpp"
#include "dcpl/gridfft.hpp"
#include "dcpl/synth.hpp"

namespace dcpl {

struct CapFrame {
  std::int64_t jc = 0;  // carrier column
  std::int64_t mc = 0;  // carrier row
  std::int64_t s = 0;   // integer shear, rounded tangent slope
};

CapFrame cap_frame(const Cap& cap, std::uint64_t R);

// inclusive integer box in frame coordinates (dj, dm') with dm' = dm - s dj
struct SpectralBox {
  std::int64_t j0 = 0, j1 = -1, m0 = 0, m1 = -1;
  bool empty() const { return j1 < j0 || m1 < m0; }
  std::int64_t width() const { return empty() ? 0 : j1 - j0 + 1; }
  std::int64_t height() const { return empty() ? 0 : m1 - m0 + 1; }
};

SpectralBox box_union(const SpectralBox& a, const SpectralBox& b);
SpectralBox box_sum(const SpectralBox& a, const SpectralBox& b);  // Minkowski sum
SpectralBox box_scale(const SpectralBox& a, int times);           // a + ... + a

SpectralBox profile_box(const FrequencyProfile& p, const CapFrame& fr);

// frame-coordinate box of the Fourier modes a gauge mask at this tiling can
// carry: |k1| <= n_tiles and |k2 - slope k1| <= 1
SpectralBox mask_margin(const PlateSpec& ps, const CapFrame& fr);

struct ModulatedField {
  std::uint64_t R = 0;
  CapFrame frame;
  std::int64_t M1 = 0, M2 = 0;
  CArray values;  // M2 rows x M1 cols, true field samples

  // sample (p, q) sits at x1 = R (p/M1 - s q/M2), x2 = R q/M2
  double x1(std::int64_t p, std::int64_t q) const {
    return static_cast<double>(R) *
           (static_cast<double>(p) / static_cast<double>(M1) -
            static_cast<double>(frame.s) * static_cast<double>(q) / static_cast<double>(M2));
  }
  double x2(std::int64_t q) const {
    return static_cast<double>(R) * static_cast<double>(q) / static_cast<double>(M2);
  }
  double cell_area() const {
    return static_cast<double>(R) / static_cast<double>(M1) * static_cast<double>(R) /
           static_cast<double>(M2);
  }
};

// next power of two >= extent * oversample (at least 8)
std::int64_t pick_size(std::int64_t extent, std::int64_t oversample = 1);

// sample the profile's trigonometric polynomial on the frame subgrid; throws
// if the frame box of the entries does not fit (M1, M2)
ModulatedField sample_field(const FrequencyProfile& p, const CapFrame& fr, std::int64_t M1,
                            std::int64_t M2);

double sup_norm(const ModulatedField& f);

// pointwise multiply by a gauge mask evaluated at the sample positions
void multiply_mask_inplace(ModulatedField& f, const TileMask& mask);

// pointwise multiply by (1 - mask)
void multiply_mask_complement_inplace(ModulatedField& f, const TileMask& mask);

// |f|^2 with the carrier cancelled; values are real
ModulatedField modulus_squared(const ModulatedField& f);

struct SpectrumEntry {
  std::int64_t k1 = 0;  // absolute integer frequency, xi = (k1, k2)/R
  std::int64_t k2 = 0;
  std::complex<double> c;
};

// exact Fourier coefficients of the sampled field, in absolute coordinates;
// drops entries below drop_tol * max|c|. Bins are unfolded into the centered
// frame window [-M/2, M/2); pass the known frame box to unfold off-center.
std::vector<SpectrumEntry> field_spectrum(const ModulatedField& f, double drop_tol = 0.0);
std::vector<SpectrumEntry> field_spectrum(const ModulatedField& f, const SpectralBox& box,
                                          double drop_tol);

// scatter absolute-frequency entries onto the standard grid and synthesize
SampledField synthesize_spectrum(const std::vector<SpectrumEntry>& spec, const GridSpec& g);

// add spectrum entries into an existing M x M scatter array (mod M indexing)
void accumulate_spectrum(CArray& scatter, const std::vector<SpectrumEntry>& spec);

// Integral of g W_U over each tile residue of the plate tiling, where g is the
// real part of the sampled field (typically |f_theta|^2); windowed quadrature
// on the subgrid samples, torus-correct.
std::vector<double> tile_weighted_integrals(const ModulatedField& g, const PlateSpec& ps);

// Exact integral of the trig polynomial over each tile parallelogram:
// integral over U of e(nu . x) = |U| e(nu . c_U) sinc(k1/n) sinc(k2 - slope k1)
std::vector<std::complex<double>> tile_sharp_integrals(const std::vector<SpectrumEntry>& spec,
                                                       const PlateSpec& ps);

// Exact L^p norm (even p) of the profile restricted to a frame: Riemann sums
// on a subgrid wide enough that no nonzero difference frequency aliases to 0
double lp_norm_exact_even_sub(const FrequencyProfile& sub, const CapFrame& fr, int pexp);

}  // namespace dcpl
