#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "heisen/report.hpp"

namespace heisen {

struct SuiteOptions {
  // smaller families and dilate sets
  bool quick = false;
  unsigned long long seed = 7;
  // kernel table cache; empty disables caching
  std::string cache_dir;
  // absolute truncation tolerance of the heat kernel series
  double kernel_tol = 1e-6;
  // block range for the decay and Bernstein suites
  std::optional<std::pair<int, int>> j_range;
};

// Suites in run order: plancherel, roundtrip, eigen, heat, pde, partition,
// bernstein, decay, characterization, refined_sobolev, maximal.
std::vector<std::string> suite_names();

// Runs one suite, or every suite for "all"; throws DomainError for an
// unknown name.
std::vector<VerificationReport> run_suite(const std::string& name, const SuiteOptions& opt = {});

}  // namespace heisen
