#include <iostream>
#include <list>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "heisen/cli.hpp"

namespace {

// Options land here as text and are applied over the config file, so flags
// and config keys share one parser.
struct Flags {
  struct Entry {
    std::string key;
    CLI::Option* opt = nullptr;
    bool is_switch = false;
    std::string text;
  };
  std::list<Entry> entries;

  void add(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& e = entries.emplace_back(Entry{key});
    e.opt = app.add_option(flag, e.text, help);
  }
  void add_switch(CLI::App& app, const std::string& flag, const std::string& key, const std::string& help) {
    auto& e = entries.emplace_back(Entry{key, nullptr, true});
    e.opt = app.add_flag(flag, help);
  }
  void apply(heisen::RunConfig& c) const {
    for (const auto& e : entries)
      if (e.opt->count() > 0) heisen::set_config_value(c, e.key, e.is_switch ? "true" : e.text);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat kernels, Besov and Sobolev norms, and verification checks on the Heisenberg group"};
  app.set_version_flag("--version", heisen::tool_version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  Flags flags;
  app.add_option("--config", config_path, "config file of 'key = value' lines");
  flags.add(app, "--cache-dir", "cache_dir", "heat kernel table cache (HEISENCALC_CACHE overrides)");
  flags.add(app, "--out", "out", "write CSV output to this file");
  flags.add(app, "--suite", "suite", "verification suites, comma-separated, or 'all'");
  flags.add(app, "--tol", "tol", "heat kernel series truncation tolerance");
  flags.add(app, "--threads", "threads", "OpenMP threads, 0 for the default");
  flags.add(app, "--seed", "seed", "seed for random families");
  flags.add_switch(app, "--quick", "quick", "smaller families and dilate sets");
  flags.add(app, "--d", "d", "complex dimension");

  auto* kernel = app.add_subcommand("kernel", "sample the heat kernel h_t(|z|, s)");
  flags.add(*kernel, "--t", "t", "time");
  flags.add(*kernel, "--r-max", "r_max", "largest |z|");
  flags.add(*kernel, "--s-max", "s_max", "largest |s|");
  flags.add(*kernel, "--step", "step", "lattice step");

  auto* norms = app.add_subcommand("norms", "Lebesgue, Besov and Sobolev norms of a function family");
  flags.add(*norms, "--family", "family", "zero, gaussian, one-mode, localized-ring or two-bump");
  flags.add(*norms, "--j", "j", "frequency blocks, a or a..b");
  flags.add(*norms, "--s", "s", "smoothness");
  flags.add(*norms, "--p", "p", "integrability, inf allowed");
  flags.add(*norms, "--r", "r", "Besov summability, inf allowed");
  flags.add(*norms, "--dilates", "dilates", "dilation exponents k, e.g. -1..1");
  flags.add(*norms, "--modes", "modes", "Hermite modes per localized function");
  flags.add(*norms, "--gap", "gap", "two-bump scale gap");

  auto* verify = app.add_subcommand("verify", "run verification suites");
  flags.add(*verify, "--j", "j", "block range for the decay and Bernstein suites, a..b");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    heisen::RunConfig cfg;
    if (!config_path.empty()) heisen::apply_config_file(cfg, config_path);
    flags.apply(cfg);
    heisen::validate(cfg);
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#endif
    if (kernel->parsed()) return heisen::cmd_kernel(cfg, std::cout, std::cerr);
    if (norms->parsed()) return heisen::cmd_norms(cfg, std::cout, std::cerr);
    return heisen::cmd_verify(cfg, std::cout, std::cout);
  } catch (const heisen::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const heisen::ToleranceError& e) {
    std::cerr << "tolerance not met: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
