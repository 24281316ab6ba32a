#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace heisen {

struct VerificationReport {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
  // headline number compared against tol
  double measured = 0.0;
  double fitted_c = std::numeric_limits<double>::quiet_NaN();
  double fitted_C = std::numeric_limits<double>::quiet_NaN();
  double tol = 0.0;
  bool pass = false;
  double runtime_s = 0.0;
  // secondary quantities, in insertion order
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> notes;

  void add(std::string key, double v) { values.emplace_back(std::move(key), v); }
  double get(const std::string& key) const;
  bool all_finite() const;
};

// Number for params; infinities become "inf" and "-inf".
nlohmann::json json_number(double v);

void write_report_csv_header(std::ostream& os);
void write_report_csv_row(std::ostream& os, const VerificationReport& r);
void write_report_summary(std::ostream& os, const VerificationReport& r);

}  // namespace heisen
