#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "heisen/error.hpp"

namespace heisen {

// Invalid configuration: unknown key, malformed or out-of-range value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  // spectral grid for norms
  int d = 1;
  int m_max = 8;
  double lambda_min = 0x1p-12;
  double lambda_max = 0x1p12;
  int order = 32;
  // Littlewood-Paley partition range for norms
  int partition_j_min = -8;
  int partition_j_max = 10;

  std::vector<std::string> suites{"all"};
  // heat kernel series tolerance
  double tol = 1e-6;
  std::string cache_dir;
  std::string out;
  unsigned long long seed = 7;
  bool quick = false;
  int threads = 0;

  // kernel command
  double t = 1.0;
  double r_max = 4.0;
  double s_max = 8.0;
  double step = 0.1;

  // norms command; j is a range, also used by the decay and Bernstein suites
  std::string family = "localized-ring";
  std::pair<int, int> j{0, 0};
  bool j_set = false;
  double s = 1.0;
  double p = 2.0;
  double r = 2.0;
  std::vector<int> dilates{0};
  int modes = 3;
  int gap = 2;
};

// Keys accepted in config files, in canonical order.
const std::vector<std::string>& config_keys();

// Sets one key from its text form; throws ConfigError.
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);

// Applies "key = value" lines; '#' starts a comment and blank lines are
// skipped. Duplicate keys take the last value.
void apply_config_text(RunConfig& c, const std::string& text, const std::string& origin = "config");
void apply_config_file(RunConfig& c, const std::string& path);

// Range and cap checks across keys; throws ConfigError.
void validate(const RunConfig& c);

// "key = value" lines for every key that affects results.
std::string canonical_config(const RunConfig& c);
// 16 hex digits of the FNV-1a hash of canonical_config.
std::string config_hash(const RunConfig& c);

// HEISENCALC_CACHE, then cache_dir, then $XDG_CACHE_HOME/heisencalc or
// $HOME/.cache/heisencalc.
std::string resolve_cache_dir(const RunConfig& c);

// "a..b" or "a"; throws ConfigError.
std::pair<int, int> parse_int_range(const std::string& text);
// Comma-separated integers and ranges, e.g. "-2..0,3".
std::vector<int> parse_int_list(const std::string& text);

std::string tool_version();

// Each writes its CSV to c.out (atomically) or to `out` when c.out is
// empty, and human-readable lines to `log`. Return the process exit code.
int cmd_kernel(const RunConfig& c, std::ostream& out, std::ostream& log);
int cmd_norms(const RunConfig& c, std::ostream& out, std::ostream& log);
int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& log);

}  // namespace heisen
