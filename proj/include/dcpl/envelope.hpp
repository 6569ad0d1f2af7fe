#pragma once
// Both sides of the wave envelope estimate: alpha^4 |{|f| > alpha}| against
// the gauge-tile sum of fourth powers of restricted square norms, plus
// amplitude scans over coefficient families.

#include <cstdint>
#include <string>
#include <vector>

#include "dcpl/pruning.hpp"
#include "dcpl/synth.hpp"

namespace dcpl {

struct EnvelopeReport {
  std::uint64_t R = 0;
  double alpha = 0.0;
  std::string family;
  double lhs = 0.0;           // alpha^4 * |{ |f| > alpha }| on the grid
  double lhs_error = 0.0;     // alpha^4 * (boundary cell count) * cell_area
  double rhs_core = 0.0;      // sum over gauge tiles of |U|^-1 ||S_U f||_2^4
  double rhs_weighted = 0.0;  // same sum with W_U-weighted square norms
  double ratio = 0.0;         // lhs / rhs_core; 0 when both vanish
  double log_exponent = 0.0;  // log(ratio) / log(log2 R)
  std::vector<std::int64_t> gauge_population;  // index k = 0..N; [0] unused
  bool alpha_in_range = true;                  // 1 <= alpha <= sqrt(R)
  bool vacuous = false;
};

// Runs the pruning cascade at the same alpha and C_p to obtain the gauge
// sets; the restricted square norms use the unpruned f_theta and sharp tile
// indicators. alpha outside [1, sqrt(R)] is computed anyway and flagged.
EnvelopeReport envelope_sides(const FrequencyProfile& f, double alpha, double Cp = 1e4,
                              int sigma = 4);

// amplitude grid {2^(j/2) : 1 <= 2^(j/2) <= sqrt(R)}; log2(R) + 1 points
std::vector<double> envelope_alpha_grid(std::uint64_t R);

struct EnvelopeScan {
  std::vector<EnvelopeReport> reports;
  double max_log_exponent = 0.0;  // over reports with a finite positive ratio
};

// full amplitude-grid sweep for one family at one R; tile integrals are
// alpha-independent and computed once
EnvelopeScan envelope_scan(const FamilySpec& family, std::uint64_t R, std::uint64_t seed,
                           double Cp = 1e4, int sigma = 4);

}  // namespace dcpl
