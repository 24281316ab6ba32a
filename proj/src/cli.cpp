#include "heisen/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "heisen/csv.hpp"
#include "heisen/group.hpp"
#include "heisen/heat.hpp"
#include "heisen/littlewood_paley.hpp"
#include "heisen/suites.hpp"
#include "heisen/verify.hpp"

#ifndef HEISENCALC_VERSION
#define HEISENCALC_VERSION "0.0.0"
#endif

namespace heisen {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const DomainError&) {
    throw ConfigError(key + ": not a number: '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    return parse_int(v);
  } catch (const DomainError&) {
    throw ConfigError(key + ": not an integer: '" + v + "'");
  }
}

int to_small_int(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < -(1LL << 30) || x > (1LL << 30)) throw ConfigError(key + ": out of range: " + v);
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::ostringstream os;
  for (size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
  return os.str();
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  std::string name;
  Setter set;
  Getter get;
  bool hashed = true;
};

Key dbl(std::string name, double RunConfig::*m) {
  return {name, [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_double(k, v); },
          [m](const RunConfig& c) { return format_double(c.*m); }};
}

Key integer(std::string name, int RunConfig::*m) {
  return {name, [m](RunConfig& c, const std::string& k, const std::string& v) { c.*m = to_small_int(k, v); },
          [m](const RunConfig& c) { return std::to_string(c.*m); }};
}

// sorted by name
const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back({"cache_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.cache_dir = v; },
                 [](const RunConfig& c) { return c.cache_dir; }, false});
    k.push_back(integer("d", &RunConfig::d));
    k.push_back({"dilates",
                 [](RunConfig& c, const std::string&, const std::string& v) { c.dilates = parse_int_list(v); },
                 [](const RunConfig& c) { return join(c.dilates); }});
    k.push_back({"family", [](RunConfig& c, const std::string&, const std::string& v) { c.family = v; },
                 [](const RunConfig& c) { return c.family; }});
    k.push_back(integer("gap", &RunConfig::gap));
    k.push_back({"j",
                 [](RunConfig& c, const std::string&, const std::string& v) {
                   c.j = parse_int_range(v);
                   c.j_set = true;
                 },
                 [](const RunConfig& c) {
                   return c.j_set ? std::to_string(c.j.first) + ".." + std::to_string(c.j.second) : std::string();
                 }});
    k.push_back(dbl("lambda_max", &RunConfig::lambda_max));
    k.push_back(dbl("lambda_min", &RunConfig::lambda_min));
    k.push_back(integer("m_max", &RunConfig::m_max));
    k.push_back(integer("modes", &RunConfig::modes));
    k.push_back(integer("order", &RunConfig::order));
    k.push_back({"out", [](RunConfig& c, const std::string&, const std::string& v) { c.out = v; },
                 [](const RunConfig& c) { return c.out; }, false});
    k.push_back(dbl("p", &RunConfig::p));
    k.push_back(integer("partition_j_max", &RunConfig::partition_j_max));
    k.push_back(integer("partition_j_min", &RunConfig::partition_j_min));
    k.push_back({"quick", [](RunConfig& c, const std::string& key, const std::string& v) { c.quick = to_bool(key, v); },
                 [](const RunConfig& c) { return std::string(c.quick ? "true" : "false"); }});
    k.push_back(dbl("r", &RunConfig::r));
    k.push_back(dbl("r_max", &RunConfig::r_max));
    k.push_back(dbl("s", &RunConfig::s));
    k.push_back(dbl("s_max", &RunConfig::s_max));
    k.push_back({"seed",
                 [](RunConfig& c, const std::string& key, const std::string& v) {
                   const long long x = to_int(key, v);
                   if (x < 0) throw ConfigError("seed: must be non-negative");
                   c.seed = static_cast<unsigned long long>(x);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});
    k.push_back(dbl("step", &RunConfig::step));
    k.push_back({"suite",
                 [](RunConfig& c, const std::string&, const std::string& v) { c.suites = split_list(v); },
                 [](const RunConfig& c) { return join(c.suites); }});
    k.push_back(dbl("t", &RunConfig::t));
    Key threads = integer("threads", &RunConfig::threads);
    threads.hashed = false;
    k.push_back(threads);
    k.push_back(dbl("tol", &RunConfig::tol));
    return k;
  }();
  return keys;
}

const Key& find_key(const std::string& name) {
  for (const auto& k : key_table())
    if (k.name == name) return k;
  throw ConfigError("unknown config key '" + name + "'");
}

void emit(const RunConfig& c, const std::string& csv, std::ostream& out) {
  if (c.out.empty())
    out << csv;
  else
    atomic_write(c.out, csv);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// Nearest short decimal, so that 3 * 0.1 prints as 0.3.
double snap(double x) {
  const double y = std::round(x * 1e9) / 1e9;
  return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)) ? y : x;
}

// lo, lo + step, ..., hi; hi - lo must be a whole number of steps.
std::vector<double> lattice(double lo, double hi, double step, const char* what) {
  const double n = (hi - lo) / step;
  const long long k = std::llround(n);
  if (std::abs(n - static_cast<double>(k)) > 1e-6) throw ConfigError(std::string(what) + ": not a multiple of step");
  std::vector<double> out(static_cast<size_t>(k + 1));
  for (long long i = 0; i <= k; ++i) out[static_cast<size_t>(i)] = snap(lo + static_cast<double>(i) * step);
  return out;
}

double lp_of(const ScaleParts& parts, double exponent, const NormOptions& opt) {
  if (parts.size() == 1 || exponent == 2.0) {
    RadialProfile f = parts.front();
    for (size_t i = 1; i < parts.size(); ++i) f = f + parts[i];
    return profile_norm(f, exponent, opt);
  }
  return split_lp_norm(parts, exponent, opt.hints);
}

double sobolev_of(const ScaleParts& parts, double s, double exponent, const NormOptions& opt) {
  if (parts.size() == 1) return sobolev_norm(parts.front(), s, exponent, opt);
  ScaleParts lifted;
  for (const auto& u : parts) {
    const int d = u.grid().d();
    lifted.push_back(multiplier(u, [&](int m, double lam) { return cplx(std::pow(eigenvalue(m, lam, d), 0.5 * s)); }));
  }
  return lp_of(lifted, exponent, opt);
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : key_table()) n.push_back(k.name);
    return n;
  }();
  return names;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
  find_key(key).set(c, key, trim(value));
}

void apply_config_text(RunConfig& c, const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set_config_value(c, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(c, ss.str(), path);
}

void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(c.d >= 1 && c.d <= 8, "d: must be in 1..8");
  need(c.m_max >= 0 && c.m_max <= 4096, "m_max: must be in 0..4096");
  need(c.lambda_min > 0.0 && c.lambda_max > c.lambda_min && std::isfinite(c.lambda_max),
       "lambda_min, lambda_max: need 0 < lambda_min < lambda_max < inf");
  need(c.order >= 2 && c.order <= 128, "order: must be in 2..128");
  need(c.partition_j_min < c.partition_j_max, "partition_j_min: must be below partition_j_max");
  need(!c.suites.empty(), "suite: empty list");
  const auto names = suite_names();
  for (const auto& s : c.suites)
    need(s == "all" || std::find(names.begin(), names.end(), s) != names.end(), "suite: unknown suite '" + s + "'");
  need(c.tol > 0.0 && c.tol < 1.0, "tol: must be in (0, 1)");
  need(c.threads >= 0, "threads: must be >= 0");
  need(c.t > 0.0 && std::isfinite(c.t), "t: must be positive");
  need(c.step > 0.0 && std::isfinite(c.step), "step: must be positive");
  need(c.r_max >= 0.0 && c.s_max >= 0.0 && std::isfinite(c.r_max) && std::isfinite(c.s_max),
       "r_max, s_max: must be finite and >= 0");
  need((c.r_max / c.step + 1.0) * (2.0 * c.s_max / c.step + 1.0) <= 1e7, "kernel: more than 1e7 points");
  const auto fams = family_names();
  need(std::find(fams.begin(), fams.end(), c.family) != fams.end(), "family: unknown family '" + c.family + "'");
  need(c.j.first <= c.j.second, "j: empty range");
  need(std::isfinite(c.s), "s: must be finite");
  need(c.p >= 1.0, "p: must be >= 1");
  need(c.r >= 1.0, "r: must be >= 1");
  need(!c.dilates.empty(), "dilates: empty list");
  need(c.modes >= 1, "modes: must be >= 1");
  need(c.gap >= 1, "gap: must be >= 1");
}

std::string canonical_config(const RunConfig& c) {
  std::string out;
  for (const auto& k : key_table())
    if (k.hashed) out += k.name + " = " + k.get(c) + "\n";
  return out;
}

std::string config_hash(const RunConfig& c) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string resolve_cache_dir(const RunConfig& c) {
  if (const char* env = std::getenv("HEISENCALC_CACHE"); env && *env) return env;
  if (!c.cache_dir.empty()) return c.cache_dir;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg) return std::string(xdg) + "/heisencalc";
  if (const char* home = std::getenv("HOME"); home && *home) return std::string(home) + "/.cache/heisencalc";
  return ".heisencalc-cache";
}

std::pair<int, int> parse_int_range(const std::string& text) {
  const std::string t = trim(text);
  const auto dots = t.find("..");
  if (dots == std::string::npos) {
    const int a = to_small_int("range", t);
    return {a, a};
  }
  const int a = to_small_int("range", trim(t.substr(0, dots)));
  const int b = to_small_int("range", trim(t.substr(dots + 2)));
  if (a > b) throw ConfigError("range: empty range '" + t + "'");
  return {a, b};
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    const auto [a, b] = parse_int_range(item);
    if (b - a > 1000) throw ConfigError("list: range too long '" + item + "'");
    for (int k = a; k <= b; ++k) out.push_back(k);
  }
  if (out.empty()) throw ConfigError("list: empty '" + text + "'");
  return out;
}

std::string tool_version() { return HEISENCALC_VERSION; }

int cmd_kernel(const RunConfig& c, std::ostream& out, std::ostream& log) {
  validate(c);
  const auto t0 = std::chrono::steady_clock::now();
  const KernelSeriesOptions series{c.tol};
  const KernelTable table = load_kernel_table(c.d, KernelLayout{}, series, resolve_cache_dir(c));

  const auto rs = lattice(0.0, c.r_max, c.step, "r_max");
  const auto ss = lattice(-c.s_max, c.s_max, c.step, "s_max");
  std::vector<double> values(rs.size() * ss.size(), 0.0);
  std::vector<std::pair<double, double>> outside;
  std::vector<size_t> outside_at;
  const double sq = std::sqrt(c.t);
  for (size_t i = 0; i < rs.size(); ++i)
    for (size_t l = 0; l < ss.size(); ++l) {
      const size_t at = i * ss.size() + l;
      if (table.contains(rs[i] / sq, std::abs(ss[l]) / c.t))
        values[at] = kernel_scaled(c.t, rs[i], ss[l], table);
      else {
        outside.emplace_back(rs[i], ss[l]);
        outside_at.push_back(at);
      }
    }
  if (!outside.empty()) {
    const auto v = kernel_eval(c.d, outside, c.t, series);
    for (size_t n = 0; n < v.size(); ++n) values[outside_at[n]] = v[n];
  }

  std::ostringstream os;
  os << "# heatkernel v1 d=" << table.d << " mmax=" << table.m_max << " lambda_max=" << format_double(table.lambda_max)
     << " tol=" << format_double(table.tol) << " t=" << format_double(c.t) << " heisencalc=" << tool_version()
     << " config=" << config_hash(c) << "\n";
  os << "r,s,value\n";
  for (size_t i = 0; i < rs.size(); ++i)
    for (size_t l = 0; l < ss.size(); ++l)
      os << format_double(rs[i]) << ',' << format_double(ss[l]) << ',' << format_double(values[i * ss.size() + l])
         << "\n";
  emit(c, os.str(), out);

  const double scale = std::pow(c.t, -(c.d + 1));
  log << "kernel: " << values.size() << " points at t=" << format_double(c.t) << ", " << outside.size()
      << " beyond the table evaluated from the series\n";
  log << "  truncation m_max=" << table.m_max << " lambda_max=" << format_double(table.lambda_max)
      << " tail bound=" << format_double(table.tail * scale) << " (tolerance " << format_double(table.tol * scale)
      << ")\n";
  log << "  table edge / peak=" << format_double(table.edge_ratio()) << "  time " << fixed(seconds_since(t0), 2)
      << " s\n";
  return 0;
}

int cmd_norms(const RunConfig& c, std::ostream& out, std::ostream& log) {
  validate(c);
  const auto t0 = std::chrono::steady_clock::now();
  const auto grid = SpectralGrid::make({c.d, c.m_max, c.lambda_min, c.lambda_max, c.order});
  const auto part = build_partition(1, c.partition_j_min, c.partition_j_max);
  const double N = homogeneous_dim(c.d);
  const NormOptions opt;
  const BesovParams bp{c.s, c.p, c.r};

  std::ostringstream os;
  os << "# heisencalc " << tool_version() << " config=" << config_hash(c) << "\n";
  os << "family,j,dilate,s,p,r,lp,besov,sobolev,sobolev_ratio,scaling_law\n";
  int rows = 0;
  for (int j = c.j.first; j <= c.j.second; ++j) {
    FamilyParams fp;
    fp.j = j;
    fp.modes = c.modes;
    fp.gap = c.gap;
    fp.s = c.s;
    fp.p = c.p;
    const double base = sobolev_of(family_parts(grid, c.family, fp), c.s, c.p, opt);
    for (int k : c.dilates) {
      fp.dilate = k;
      const ScaleParts parts = family_parts(grid, c.family, fp);
      RadialProfile u = parts.front();
      for (size_t i = 1; i < parts.size(); ++i) u = u + parts[i];
      const double lp = lp_of(parts, c.p, opt);
      const double besov = besov_norm(u, bp, part, opt);
      const double sob = k == 0 ? base : sobolev_of(parts, c.s, c.p, opt);
      const double ratio = base > 0.0 ? sob / base : std::nan("");
      const double law = std::exp2(k * (c.s - N / c.p));
      os << c.family << ',' << j << ',' << k << ',' << format_double(c.s) << ',' << format_double(c.p) << ','
         << format_double(c.r) << ',' << format_double(lp) << ',' << format_double(besov) << ','
         << format_double(sob) << ',' << format_double(ratio) << ',' << format_double(law) << "\n";
      ++rows;
    }
  }
  emit(c, os.str(), out);
  log << "norms: " << rows << " rows for family " << c.family << " in " << fixed(seconds_since(t0), 2) << " s\n";
  return 0;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& log) {
  validate(c);
  SuiteOptions so;
  so.quick = c.quick;
  so.seed = c.seed;
  so.cache_dir = resolve_cache_dir(c);
  so.kernel_tol = c.tol;
  if (c.j_set) so.j_range = c.j;

  std::vector<VerificationReport> all;
  for (const auto& name : c.suites) {
    const auto t0 = std::chrono::steady_clock::now();
    auto reports = run_suite(name, so);
    int failed = 0;
    for (const auto& r : reports) {
      write_report_summary(log, r);
      failed += r.pass ? 0 : 1;
    }
    log << "suite " << name << ": " << reports.size() - failed << "/" << reports.size() << " passed in "
        << fixed(seconds_since(t0), 1) << " s\n";
    for (auto& r : reports) all.push_back(std::move(r));
  }

  std::ostringstream os;
  os << "# heisencalc " << tool_version() << " config=" << config_hash(c) << "\n";
  write_report_csv_header(os);
  for (const auto& r : all) write_report_csv_row(os, r);
  if (!c.out.empty()) atomic_write(c.out, os.str());
  else out << os.str();

  const bool ok = std::all_of(all.begin(), all.end(), [](const VerificationReport& r) { return r.pass; });
  log << (ok ? "all checks passed" : "some checks failed") << "\n";
  return ok ? 0 : 1;
}

}  // namespace heisen
