#include "dcpl/decoupling.hpp"

#include <cmath>
#include <stdexcept>

#include "dcpl/modfield.hpp"

namespace dcpl {

namespace {

bool near_even_integer(double p, int& out) {
  auto r = static_cast<int>(std::lround(p));
  if (std::fabs(p - static_cast<double>(r)) > 1e-12) return false;
  if (r < 2 || r % 2 != 0) return false;
  out = r;
  return true;
}

// cell integral of |f|^p, exact for even integer p
double p_mass(const FrequencyProfile& f, double p, int sigma) {
  int pe = 0;
  if (near_even_integer(p, pe)) return std::pow(lp_norm_exact_even(f, pe), p);
  GridSpec g = make_grid(f.R, sigma);
  double n = lp_norm(synthesize(f, g), p);
  return std::pow(n, p);
}

double p_mass_cap(const FrequencyProfile& sub, const Cap& cap, double p, int sigma) {
  int pe = 0;
  if (near_even_integer(p, pe))
    return std::pow(lp_norm_exact_even_sub(sub, cap_frame(cap, sub.R), pe), p);
  GridSpec g = make_grid(sub.R, sigma);
  double n = lp_norm(synthesize(sub, g), p);
  return std::pow(n, p);
}

}  // namespace

bool admissible_exponents(const ExponentTriple& t) {
  if (!(t.p >= 1.0) || !(t.q >= 1.0)) return false;
  if (!std::isfinite(t.q)) return false;
  if (!(t.beta >= 0.5) || !(t.beta > 0.0) || t.beta > 1.0) return false;
  return 3.0 / t.p + 1.0 / t.q <= 1.0 + 1e-12;
}

double theoretical_bound_core(const ExponentTriple& t, std::uint64_t R) {
  double Rd = static_cast<double>(R);
  double e1 = t.beta * (t.p - t.p / t.q - 1.0) - 1.0;
  double e2 = t.p * t.beta * (0.5 - 1.0 / t.q);
  return 1.0 + std::pow(Rd, e1) + std::pow(Rd, e2);
}

double theoretical_bound(const ExponentTriple& t, std::uint64_t R) {
  double L = std::log2(static_cast<double>(R));
  return std::pow(L, 30.0 + 3.0 * t.p) * theoretical_bound_core(t, R);
}

double predicted_exponent(const ExponentTriple& t) {
  double e1 = t.beta * (t.p - t.p / t.q - 1.0) - 1.0;
  double e2 = t.p * t.beta * (0.5 - 1.0 / t.q);
  return std::max({0.0, e1, e2});
}

DecouplingReport decoupling_ratio(const FrequencyProfile& f, const ExponentTriple& t,
                                  int sigma) {
  if (!admissible_exponents(t))
    throw std::invalid_argument("decoupling_ratio: inadmissible exponents");
  validate_profile(f);

  DecouplingReport rep;
  rep.triple = t;
  rep.R = f.R;
  double num = p_mass(f, t.p, sigma);
  if (!(num > 0.0)) throw std::invalid_argument("decoupling_ratio: zero field");

  auto parts = build_small_caps(f.R, t.beta);
  double den = 0.0;
  for (const auto& gamma : parts.caps) {
    FrequencyProfile sub = cap_component(f, gamma);
    if (sub.entries.empty()) continue;
    ++rep.n_active;
    double mass = p_mass_cap(sub, gamma, t.p, sigma);
    den += std::pow(std::pow(mass, 1.0 / t.p), t.q);
  }
  if (!(den > 0.0)) throw std::invalid_argument("decoupling_ratio: no active caps");

  rep.d_emp = num / std::pow(den, t.p / t.q);
  rep.bound_core = theoretical_bound_core(t, f.R);
  rep.E1 = 30.0 + 3.0 * t.p;
  double L = std::log2(static_cast<double>(f.R));
  rep.log_margin = std::log(rep.d_emp / rep.bound_core) / std::log(L);
  rep.pass = rep.log_margin <= rep.E1;
  return rep;
}

ExponentFit exponent_fit(const FamilySpec& family, const ExponentTriple& t,
                         const std::vector<std::uint64_t>& Rs, std::uint64_t seed, int sigma) {
  if (Rs.size() < 3)
    throw std::invalid_argument("exponent_fit: need at least three scales");
  ExponentFit fit;
  fit.predicted = predicted_exponent(t);
  std::vector<double> xs, ys;
  for (std::uint64_t R : Rs) {
    FrequencyProfile f =
        make_family(family, R, substream(seed, "fit-R" + std::to_string(R)));
    auto rep = decoupling_ratio(f, t, sigma);
    rep.family = family_kind_to_string(family.kind);
    xs.push_back(std::log2(static_cast<double>(R)));
    ys.push_back(std::log2(rep.d_emp));
    fit.reports.push_back(std::move(rep));
  }
  double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double det = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double e = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace dcpl
