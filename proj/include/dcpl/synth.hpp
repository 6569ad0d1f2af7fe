#pragma once
// The discrete frequency lattice on the parabola neighborhood, coefficient
// profiles, synthesis to sampled fields, norms, superlevel measures, seeded
// coefficient families, and file I/O for profiles and fields.

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dcpl/geom.hpp"
#include "dcpl/gridfft.hpp"

namespace dcpl {

struct LatticePoint {
  std::int64_t j = 0;
  std::int64_t m = 0;
};

// all integer pairs with |j| <= R and |m - j^2/R| <= 1, ordered by (j, m)
std::vector<LatticePoint> build_lattice(std::uint64_t R);

struct ProfileEntry {
  std::int64_t j = 0;
  std::int64_t m = 0;
  std::complex<double> a;
};

struct FrequencyProfile {
  std::uint64_t R = 0;
  std::vector<ProfileEntry> entries;  // ordered by (j, m), on-lattice
};

void validate_profile(const FrequencyProfile& p);

// f(x) = sum a * e(j x1/R + m x2/R) sampled on the grid via scatter + backward FFT;
// exact to FFT round-off
SampledField synthesize(const FrequencyProfile& p, const GridSpec& g);

// entries whose column j/R lies in the cap interval
FrequencyProfile cap_component(const FrequencyProfile& p, const Cap& cap);

// Riemann Lp norm on the field's own grid, p >= 1
double lp_norm(const SampledField& f, double p);

// Exact cell integral of |f|^p for even p, via an anti-aliased row scan
// (no nonzero difference frequency of |f|^p survives modulo the scan length)
double lp_norm_exact_even(const FrequencyProfile& p, int pexp);

// cell_area * #{nodes : |f| > alpha}
double superlevel_measure(const SampledField& f, double alpha);

double sup_norm(const SampledField& f);

// sup over the sigma-oversampled standard grid, computed by row streaming
double grid_sup_norm(const FrequencyProfile& p, std::int64_t sigma = 4);

// Streamed evaluation: calls fn(q, row) for each grid row q of the Mtilde-point
// grid (spacing R/Mtilde), where row is the length-Mtilde sample line. Never
// materializes the full grid.
void scan_rows(const FrequencyProfile& p, std::int64_t Mtilde,
               const std::function<void(std::int64_t, const std::complex<double>*)>& fn);

enum class FamilyKind { flat, random_phase, single_cap, block, gaussian };

FamilyKind family_kind_from_string(const std::string& s);
std::string family_kind_to_string(FamilyKind k);

struct FamilySpec {
  FamilyKind kind = FamilyKind::flat;
  double beta = 0.5;      // partition used by single_cap
  int cap_index = -1;     // -1: middle
  int block_level = 1;    // for block
  int block_index = -1;   // -1: middle
  int perturb = 0;        // extra coefficient redraws
};

// Seeded coefficient family on the lattice, normalized so the largest
// canonical-cap sup-norm (measured on an oversampled cap subgrid, a subset of
// the standard grid) equals 1.
FrequencyProfile make_family(const FamilySpec& spec, std::uint64_t R, std::uint64_t seed);

// sup_x |f_theta(x)| per canonical level-N cap, measured on the cap subgrid;
// also used by make_family's normalization
std::vector<double> cap_sup_norms(const FrequencyProfile& p, const CapTree& tree);

// deterministic substream derivation
std::uint64_t substream(std::uint64_t seed, const std::string& tag);

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform();                  // [0,1)
  std::array<double, 2> gauss();     // Box-Muller pair, platform-stable
};

// profile JSON: {"R": R, "entries": [[j,m,re,im], ...]}
std::string profile_to_json(const FrequencyProfile& p);
FrequencyProfile profile_from_json(const std::string& text);
void write_profile_json(const FrequencyProfile& p, const std::string& path);
FrequencyProfile read_profile_json(const std::string& path);

// binary field dump: "DCPL", u32 version, u64 R, u64 M, then M*M complex
// doubles row-major, little-endian
void write_field_bin(const SampledField& f, const std::string& path);
SampledField read_field_bin(const std::string& path);

}  // namespace dcpl
