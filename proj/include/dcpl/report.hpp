#pragma once
// JSON and CSV emission for lemma, envelope, and decoupling reports. All
// output is deterministic: ordered keys, fixed formatting, non-finite values
// spelled "inf"/"-inf"/"nan".

#include <string>

#include "dcpl/decoupling.hpp"
#include "dcpl/envelope.hpp"
#include "dcpl/highlow.hpp"

namespace dcpl {

std::string report_json(const LemmaReport& r);
std::string report_json(const EnvelopeReport& r);
std::string report_json(const DecouplingReport& r);

std::string envelope_csv_header();
std::string envelope_csv_row(const EnvelopeReport& r);

std::string decouple_csv_header();
// slope column is empty unless a fit accompanies the row
std::string decouple_csv_row(const DecouplingReport& r, bool with_slope = false,
                             double slope = 0.0);

std::string format_double(double v);  // %.12g with explicit inf/nan spellings

}  // namespace dcpl
