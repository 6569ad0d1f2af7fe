#pragma once
// Direct numerical tests of the small cap decoupling inequality: empirical
// decoupling constants, theoretical power bounds, admissibility of exponent
// triples, and power-law exponent fitting across scales.

#include <cstdint>
#include <string>
#include <vector>

#include "dcpl/synth.hpp"

namespace dcpl {

struct ExponentTriple {
  double p = 6.0;
  double q = 6.0;
  double beta = 1.0;
};

// p, q >= 1, q finite, beta in [1/2, 1], and 3/p + 1/q <= 1
bool admissible_exponents(const ExponentTriple& t);

struct DecouplingReport {
  ExponentTriple triple;
  std::uint64_t R = 0;
  std::string family;
  double d_emp = 0.0;       // ||f||_p^p / (sum_gamma ||f_gamma||_p^q)^(p/q)
  double bound_core = 0.0;  // 1 + R^(beta(p - p/q - 1) - 1) + R^(p beta (1/2 - 1/q))
  double log_margin = 0.0;  // log(d_emp / bound_core) / log(log2 R)
  double E1 = 0.0;          // gate exponent 30 + 3p
  int n_active = 0;         // caps gamma with a nonzero component
  bool pass = false;        // log_margin <= E1
};

// power terms without the log factor, and the full bound with it
double theoretical_bound_core(const ExponentTriple& t, std::uint64_t R);
double theoretical_bound(const ExponentTriple& t, std::uint64_t R);

// the largest power of R appearing in bound_core
double predicted_exponent(const ExponentTriple& t);

// All norms over the periodic cell; even integer p exactly, otherwise by grid
// quadrature at the given oversampling. Zero-component caps are dropped.
DecouplingReport decoupling_ratio(const FrequencyProfile& f, const ExponentTriple& t,
                                  int sigma = 4);

struct ExponentFit {
  double slope = 0.0;      // least-squares slope of log2 d_emp against log2 R
  double intercept = 0.0;
  double residual = 0.0;   // root-mean-square misfit in log2 d_emp
  double predicted = 0.0;  // largest bound_core power for comparison
  std::vector<DecouplingReport> reports;
};

// needs at least three scales; one family instance per R, substream-seeded
ExponentFit exponent_fit(const FamilySpec& family, const ExponentTriple& t,
                         const std::vector<std::uint64_t>& Rs, std::uint64_t seed,
                         int sigma = 4);

}  // namespace dcpl
