#include "heisen/report.hpp"

#include <cmath>
#include <ostream>

#include "heisen/csv.hpp"
#include "heisen/error.hpp"

namespace heisen {

namespace {

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v) { return std::isnan(v) ? std::string() : format_double(v); }

}  // namespace

double VerificationReport::get(const std::string& key) const {
  for (const auto& [k, v] : values)
    if (k == key) return v;
  throw DomainError("report " + name + ": no value '" + key + "'");
}

bool VerificationReport::all_finite() const {
  if (!std::isfinite(measured)) return false;
  for (const auto& kv : values)
    if (std::isnan(kv.second)) return false;
  return true;
}

nlohmann::json json_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

void write_report_csv_header(std::ostream& os) { os << "check,param_json,measured,fitted_c,fitted_C,tol,pass\n"; }

void write_report_csv_row(std::ostream& os, const VerificationReport& r) {
  os << r.name << ',' << csv_quote(r.params.dump()) << ',' << num(r.measured) << ',' << num(r.fitted_c) << ','
     << num(r.fitted_C) << ',' << num(r.tol) << ',' << (r.pass ? "true" : "false") << "\n";
}

void write_report_summary(std::ostream& os, const VerificationReport& r) {
  os << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << "  " << r.params.dump() << "\n";
  os << "    measured=" << format_double(r.measured) << " tol=" << format_double(r.tol);
  if (!std::isnan(r.fitted_c)) os << " c=" << format_double(r.fitted_c);
  if (!std::isnan(r.fitted_C)) os << " C=" << format_double(r.fitted_C);
  os << "\n";
  for (const auto& [k, v] : r.values) os << "    " << k << " = " << format_double(v) << "\n";
  for (const auto& n : r.notes) os << "    note: " << n << "\n";
}

}  // namespace heisen
