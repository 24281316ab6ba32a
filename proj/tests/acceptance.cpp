// Acceptance run: one line per criterion with its measured values, budget and
// wall time. Exits nonzero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "heisen/csv.hpp"
#include "heisen/suites.hpp"

using namespace heisen;
namespace fs = std::filesystem;

namespace {

using Reports = std::vector<VerificationReport>;

struct Criterion {
  int id;
  std::string title;
  std::string suite;
  double budget_s;
  // largest measured value allowed per report name
  std::map<std::string, double> limits;
  size_t reports;
  // extra requirement beyond the limits, with a short account of it
  std::function<bool(const Reports&, std::string&)> extra;
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const VerificationReport* find(const Reports& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.name == name) return &r;
  return nullptr;
}

bool judge(const Criterion& c, const Reports& rs, std::string& detail) {
  std::ostringstream os;
  bool ok = rs.size() == c.reports;
  if (!ok) os << "expected " << c.reports << " reports, got " << rs.size() << "; ";
  std::map<std::string, double> worst;
  for (const auto& r : rs) {
    const auto lim = c.limits.find(r.name);
    if (lim == c.limits.end()) {
      os << "unexpected report " << r.name << "; ";
      ok = false;
      continue;
    }
    const bool within = std::isfinite(r.measured) && r.measured <= lim->second && r.tol <= lim->second;
    ok = ok && r.pass && within;
    auto [it, fresh] = worst.emplace(r.name, r.measured);
    if (!fresh) it->second = std::max(it->second, r.measured);
  }
  for (const auto& [name, v] : worst)
    os << name << "=" << format_double(v) << " (<= " << format_double(c.limits.at(name)) << ") ";
  if (c.extra) {
    std::string more;
    ok = c.extra(rs, more) && ok;
    os << more;
  }
  detail = os.str();
  return ok;
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "heisen_acceptance";
  const fs::path cache = work / "cache";
  // criterion 4 is timed with a cold kernel table cache
  fs::remove_all(cache);
  fs::create_directories(cache);
  ::unsetenv("HEISENCALC_CACHE");

  SuiteOptions so;
  so.cache_dir = cache.string();

  const std::vector<Criterion> criteria{
      {1, "Plancherel identity", "plancherel", 30, {{"plancherel", 1e-4}}, 1, nullptr},
      {2, "forward/inverse round trip", "roundtrip", 30, {{"roundtrip", 1e-6}}, 1, nullptr},
      {3, "finite-difference eigenrelation", "eigen", 120, {{"eigenrelation", 1e-2}}, 1,
       [](const Reports& rs, std::string& d) {
         const double g = rs.empty() ? 0.0 : rs.front().get("min_refinement_gain");
         d = "refinement_gain=" + format_double(g) + " (>= 3)";
         return g >= 3.0;
       }},
      {4, "semigroup, kernel scaling, mass, positivity (cold cache)", "heat", 120,
       {{"heat_semigroup", 1e-12}, {"kernel_self_similarity", 1e-4}, {"kernel_mass", 1e-4},
        {"kernel_positivity", 1e-6}},
       4, nullptr},
      {5, "finite-difference heat flow vs kernel convolution", "pde", 180, {{"pde_cross_validation", 5e-2}}, 1,
       [](const Reports& rs, std::string& d) {
         const auto* r = find(rs, "pde_cross_validation");
         const bool both = r && r->params.contains("times") && r->params["times"].size() == 2;
         d = both ? "t in {0.05, 0.1}" : "missing times";
         return both;
       }},
      {6, "partition of unity and block disjointness", "partition", 5, {{"partition", 1e-12}}, 1,
       [](const Reports& rs, std::string& d) {
         const double overlaps = rs.empty() ? 1.0 : rs.front().get("overlaps");
         d = "overlaps=" + format_double(overlaps);
         return overlaps == 0.0;
       }},
      {7, "Bernstein ratios across blocks", "bernstein", 60, {{"bernstein", 1.5}}, 4, nullptr},
      {8, "uniform heat decay rates", "decay", 60, {{"decay", 1.2}}, 2, nullptr},
      {9, "heat characterization of negative Besov norms", "characterization", 180,
       {{"tgrid_reproducing", 1e-3}, {"heat_characterization", 1e-3}}, 5,
       [](const Reports& rs, std::string& d) {
         double c0 = 0.0;
         for (const auto& r : rs)
           if (r.name == "heat_characterization") c0 = std::max(c0, r.fitted_C);
         d = "C0=" + format_double(c0);
         return std::isfinite(c0) && c0 >= 1.0;
       }},
      {10, "refined Sobolev inequality and Besov embedding", "refined_sobolev", 180,
       {{"refined_sobolev", 1e-2}, {"besov_embedding", 1e-2}}, 2,
       [](const Reports& rs, std::string& d) {
         const auto* r = find(rs, "refined_sobolev");
         const bool gains = r && r->get("two_bump_gain_below_singles") == 1.0;
         d = gains ? "two-bump gain below single bumps" : "two-bump gain not below single bumps";
         return gains;
       }},
      {11, "ball doubling, convolution bound and maximal L^p bound", "maximal", 120,
       {{"ball_volume", 0.1}, {"maximal_convolution", 0.0}, {"maximal_lp", 16.0}}, 4, nullptr},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Reports rs;
    std::string detail;
    bool ok = false;
    try {
      rs = run_suite(c.suite, so);
      ok = judge(c, rs, detail);
    } catch (const std::exception& e) {
      detail = std::string("error: ") + e.what();
    }
    const double t = elapsed(t0);
    const bool in_budget = t <= c.budget_s;
    ok = ok && in_budget;
    failed += ok ? 0 : 1;
    std::printf("[%s] %2d %-58s %7.1f s / %4.0f s  %s\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), t, c.budget_s,
                detail.c_str());
    std::fflush(stdout);
  }

  {
    const double budget = 900.0;
    const fs::path log = work / "verify_quick.log";
    const std::string cmd = std::string(HEISENCALC_BIN) + " verify --suite all --quick --cache-dir " +
                            cache.string() + " --out " + (work / "verify_quick.csv").string() + " > " +
                            log.string() + " 2>&1";
    const auto t0 = std::chrono::steady_clock::now();
    const int code = run_command(cmd);
    const double t = elapsed(t0);
    const bool ok = code == 0 && t <= budget;
    failed += ok ? 0 : 1;
    std::printf("[%s] %2d %-58s %7.1f s / %4.0f s  exit=%d log=%s\n", ok ? "PASS" : "FAIL", 12,
                "heisencalc verify --suite all --quick", t, budget, code, log.string().c_str());
  }

  std::printf("%d of 12 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
