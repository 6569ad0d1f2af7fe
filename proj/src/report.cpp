#include "dcpl/report.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"

namespace dcpl {

namespace {

using ordered_json = nlohmann::ordered_json;

// JSON has no inf/nan literals; spell them out instead of emitting null
ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

std::string format_double(double v) {
  if (!std::isfinite(v)) {
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string report_json(const LemmaReport& r) {
  ordered_json j;
  j["lemma"] = r.lemma;
  ordered_json prm = ordered_json::object();
  for (const auto& [key, val] : r.params) prm[key] = num(val);
  j["params"] = prm;
  j["lhs"] = num(r.lhs);
  j["rhs"] = num(r.rhs);
  j["ratio"] = num(r.ratio);
  j["log_exponent"] = num(r.log_exponent);
  j["stated_power"] = num(r.stated_power);
  j["tolerance_factor"] = num(r.tolerance_factor);
  j["slack"] = num(r.slack);
  j["vacuous"] = r.vacuous;
  j["pass"] = r.pass;
  return j.dump();
}

std::string report_json(const EnvelopeReport& r) {
  ordered_json j;
  j["R"] = r.R;
  j["alpha"] = num(r.alpha);
  j["family"] = r.family;
  j["lhs"] = num(r.lhs);
  j["lhs_error"] = num(r.lhs_error);
  j["rhs_core"] = num(r.rhs_core);
  j["rhs_weighted"] = num(r.rhs_weighted);
  j["ratio"] = num(r.ratio);
  j["log_exponent"] = num(r.log_exponent);
  j["gauge_population"] = r.gauge_population;
  j["alpha_in_range"] = r.alpha_in_range;
  j["vacuous"] = r.vacuous;
  return j.dump();
}

std::string report_json(const DecouplingReport& r) {
  ordered_json j;
  j["family"] = r.family;
  j["p"] = num(r.triple.p);
  j["q"] = num(r.triple.q);
  j["beta"] = num(r.triple.beta);
  j["R"] = r.R;
  j["d_emp"] = num(r.d_emp);
  j["bound_core"] = num(r.bound_core);
  j["log_margin"] = num(r.log_margin);
  j["E1"] = num(r.E1);
  j["n_active"] = r.n_active;
  j["pass"] = r.pass;
  return j.dump();
}

std::string envelope_csv_header() {
  return "family,R,alpha,lhs,lhs_error,rhs_core,rhs_weighted,ratio,log_exponent,gauge_sizes";
}

std::string envelope_csv_row(const EnvelopeReport& r) {
  std::string gauges;
  for (std::size_t k = 1; k < r.gauge_population.size(); ++k) {
    if (k > 1) gauges += ';';
    gauges += std::to_string(r.gauge_population[k]);
  }
  return r.family + "," + std::to_string(r.R) + "," + format_double(r.alpha) + "," +
         format_double(r.lhs) + "," + format_double(r.lhs_error) + "," +
         format_double(r.rhs_core) + "," + format_double(r.rhs_weighted) + "," +
         format_double(r.ratio) + "," + format_double(r.log_exponent) + "," + gauges;
}

std::string decouple_csv_header() {
  return "family,p,q,beta,R,d_emp,bound_core,log_margin,slope";
}

std::string decouple_csv_row(const DecouplingReport& r, bool with_slope, double slope) {
  return r.family + "," + format_double(r.triple.p) + "," + format_double(r.triple.q) + "," +
         format_double(r.triple.beta) + "," + std::to_string(r.R) + "," +
         format_double(r.d_emp) + "," + format_double(r.bound_core) + "," +
         format_double(r.log_margin) + "," + (with_slope ? format_double(slope) : std::string());
}

}  // namespace dcpl
