#include "heisen/suites.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "heisen/csv.hpp"
#include "heisen/error.hpp"
#include "heisen/field.hpp"
#include "heisen/heat.hpp"
#include "heisen/laguerre.hpp"
#include "heisen/littlewood_paley.hpp"
#include "heisen/spectral.hpp"
#include "heisen/verify.hpp"

namespace heisen {

namespace {

using Clock = std::chrono::steady_clock;
using Reports = std::vector<VerificationReport>;

constexpr double kInf = std::numeric_limits<double>::infinity();

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void finish(VerificationReport& rep, Clock::time_point t0, bool ok) {
  rep.pass = rep.all_finite() && ok;
  rep.runtime_s = seconds_since(t0);
}

const KernelTable& kernel_table(const SuiteOptions& opt) {
  static std::mutex mu;
  static std::map<std::pair<double, std::string>, KernelTable> memo;
  std::lock_guard<std::mutex> lock(mu);
  const auto key = std::make_pair(opt.kernel_tol, opt.cache_dir);
  auto it = memo.find(key);
  if (it == memo.end()) {
    KernelSeriesOptions so;
    so.tol = opt.kernel_tol;
    it = memo.emplace(key, load_kernel_table(1, {}, so, opt.cache_dir)).first;
  }
  return it->second;
}

RadialProfile profile_from(const GridPtr& g, const std::function<cplx(int, double)>& f) {
  Eigen::MatrixXcd v(g->m_max() + 1, g->size());
  for (int m = 0; m <= g->m_max(); ++m)
    for (size_t k = 0; k < g->size(); ++k) v(m, k) = f(m, g->lambda(k));
  return RadialProfile(g, v);
}

double rel_profile_err(const RadialProfile& a, const RadialProfile& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff() / b.values().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

Reports plancherel_suite(const SuiteOptions& opt) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "plancherel";
  rep.tol = 1e-4;
  struct Fn {
    double a, b, lam0;
    int poly;
  };
  // poly(r^2) exp(-a r^2 - b s^2) cos(lam0 s)
  std::vector<Fn> family{{12, 1, 12, 0},  {10, 1, 12, 1},  {14, 1.2, 13, 0}, {12, 0.8, 11, 2}, {11, 1, 12.5, 0},
                         {13, 0.9, 12, 1}, {12, 1.1, 11.5, 2}, {10.5, 1, 12, 0}, {13.5, 1, 12.5, 1}, {12, 1, 12, 2}};
  if (opt.quick) family.resize(4);
  const auto g = SpectralGrid::make({1, 128, 0x1p-12, 0x1p12, 16});
  const auto q = make_quadrature(1, 2.6, 26, 16, 7.0, 449);
  ForwardOptions fo;
  fo.lambda_eval = 32.0;
  double worst = 0.0;
  for (size_t i = 0; i < family.size(); ++i) {
    const auto fn = family[i];
    auto rf = RadialFunction::sample(q, [&](double r, double s) {
      const double r2 = r * r;
      const double poly = fn.poly == 0 ? 1.0 : fn.poly == 1 ? 1.0 + r2 : r2 * (2.0 - r2);
      return cplx(poly * std::exp(-fn.a * r2 - fn.b * s * s) * std::cos(fn.lam0 * s));
    });
    const double direct = radial_lp_norm(rf, 2.0);
    const double err = std::abs(plancherel_norm(forward_transform(rf, g, fo)) - direct) / direct;
    rep.add("rel_err_f" + std::to_string(i), err);
    worst = std::max(worst, err);
  }
  rep.params = {{"functions", family.size()}, {"m_max", 128}};
  rep.measured = worst;
  finish(rep, t0, worst <= rep.tol);
  return {rep};
}

// Bump near |lambda| = center whose s-transform decays like a power.
double dyadic_bump(double lam, double center, double a) {
  const double x = std::abs(lam) / center;
  const double v = std::exp(a * (std::log(x) - x + 1.0));
  return v < 1e-18 ? 0.0 : v;
}

Reports roundtrip_suite(const SuiteOptions& opt) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "roundtrip";
  rep.tol = 1e-6;
  std::vector<std::pair<int, double>> cases{{1, 1.0}, {2, 1.0}, {1, 4.0}};
  if (opt.quick) cases.resize(2);
  double worst = 0.0;
  for (auto [d, center] : cases) {
    const auto g = SpectralGrid::make({d, 12, 0x1p-10, 0x1p10, 32});
    const auto p = profile_from(g, [&](int m, double lam) {
      if (m > 6) return cplx(0.0);
      const double c = center * (1.0 + 0.02 * m);
      return lam > 0 ? cplx(dyadic_bump(lam, c, 40) * (1.0 + 0.1 * m)) : cplx(0.0, 0.2 * dyadic_bump(lam, c, 40));
    });
    const auto f = inverse_transform(p, quadrature_for(p));
    ForwardOptions fo;
    fo.decay_floor = 1e-8;
    const double err = rel_profile_err(forward_transform(f, g, fo), p);
    rep.add("rel_err_d" + std::to_string(d) + "_c" + format_double(center), err);
    worst = std::max(worst, err);
  }
  rep.params = {{"cases", cases.size()}};
  rep.measured = worst;
  finish(rep, t0, worst <= rep.tol);
  return {rep};
}

Reports eigen_suite(const SuiteOptions& opt) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "eigenrelation";
  rep.tol = 1e-2;
  std::vector<std::pair<int, double>> modes{{0, 1.0}, {1, 1.0}, {0, -1.0}, {1, -1.0}};
  if (opt.quick) modes.resize(2);
  double worst = 0.0, gain = kInf;
  for (auto [m, lam] : modes) {
    std::vector<double> errs;
    for (int n : {32, 64}) {
      // odd x, y node counts put the origin on the grid
      const auto G = GridSpec{n + 1, n + 1, n, 3.6, 3.6, 2.0 * std::numbers::pi};
      const auto u = SampledField::sample(G, [&](double x, double y, double s) {
        return std::polar(1.0, -lam * s) * weighted_laguerre(m, 0, 2.0 * std::abs(lam) * (x * x + y * y));
      });
      const auto fd = sublaplacian_fd(u);
      const double mu = eigenvalue(m, lam, 1);
      double num = 0.0, den = 0.0;
      for (int i = 2; i < G.nx - 2; ++i)
        for (int j = 2; j < G.ny - 2; ++j)
          for (int k = 0; k < G.ns; ++k) {
            num += std::norm(-fd.at(i, j, k) - mu * u.at(i, j, k));
            den += std::norm(mu * u.at(i, j, k));
          }
      errs.push_back(std::sqrt(num / den));
    }
    const std::string tag = "_m" + std::to_string(m) + (lam > 0 ? "_pos" : "_neg");
    rep.add("rel_err_n32" + tag, errs[0]);
    rep.add("rel_err_n64" + tag, errs[1]);
    worst = std::max(worst, errs[0]);
    gain = std::min(gain, errs[0] / errs[1]);
  }
  rep.add("min_refinement_gain", gain);
  rep.params = {{"modes", modes.size()}, {"n", {32, 64}}};
  rep.measured = worst;
  rep.fitted_c = gain;
  finish(rep, t0, worst <= rep.tol && gain >= 3.0);
  return {rep};
}

Reports heat_suite(const SuiteOptions& opt) {
  Reports out;
  {
    const auto t0 = Clock::now();
    VerificationReport rep;
    rep.name = "heat_semigroup";
    rep.tol = 1e-12;
    const auto g = verify_grid();
    double worst = 0.0;
    for (const auto& name : {"localized-ring", "gaussian"}) {
      const auto u = family_profile(g, name);
      for (auto [a, b] : {std::pair{0.1, 0.3}, std::pair{0.02, 1.5}}) {
        const double err = rel_profile_err(heat_apply(heat_apply(u, a), b), heat_apply(u, a + b));
        worst = std::max(worst, err);
      }
    }
    rep.measured = worst;
    finish(rep, t0, worst <= rep.tol);
    out.push_back(rep);
  }
  const auto& table = kernel_table(opt);
  {
    const auto t0 = Clock::now();
    VerificationReport rep;
    rep.name = "kernel_self_similarity";
    rep.tol = 1e-4;
    KernelSeriesOptions so;
    so.tol = opt.kernel_tol;
    double worst = 0.0;
    for (double t : {0.25, 0.6, 4.0}) {
      std::vector<std::pair<double, double>> pts;
      for (double r = 0.03; r < 5.5; r += opt.quick ? 1.22 : 0.61)
        for (double s = 0.11; s < 14.0; s += opt.quick ? 3.46 : 1.73) pts.push_back({r * std::sqrt(t), s * t});
      const auto exact = kernel_eval(1, pts, t, so);
      double w = 0.0;
      for (size_t i = 0; i < pts.size(); ++i)
        w = std::max(w, std::abs(kernel_scaled(t, pts[i].first, pts[i].second, table) - exact[i]) / exact[i]);
      rep.add("rel_err_t" + format_double(t), w);
      worst = std::max(worst, w);
    }
    rep.params = {{"kernel_tol", opt.kernel_tol}};
    rep.measured = worst;
    finish(rep, t0, worst <= rep.tol);
    out.push_back(rep);
  }
  {
    const auto t0 = Clock::now();
    VerificationReport rep;
    rep.name = "kernel_mass";
    rep.tol = 1e-4;
    // Simpson on [0, 7.9 sqrt t] x [0, 31.9 t] in (|z|, s), h even in s
    auto simpson = [](int n, double step) {
      std::vector<double> w(n);
      for (int i = 0; i < n; ++i) w[i] = step / 3.0 * ((i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0));
      return w;
    };
    double worst = 0.0;
    for (double t : {0.05, 0.5, 2.0}) {
      const int nr = 161, ns = 641;
      const double rmax = 7.9 * std::sqrt(t), smax = 31.9 * t;
      const auto wr = simpson(nr, rmax / (nr - 1)), ws = simpson(ns, smax / (ns - 1));
      double acc = 0.0;
      for (int i = 0; i < nr; ++i)
        for (int l = 0; l < ns; ++l) {
          const double r = i * rmax / (nr - 1), s = l * smax / (ns - 1);
          acc += wr[i] * ws[l] * r * kernel_scaled(t, r, s, table);
        }
      const double err = std::abs(4.0 * std::numbers::pi * acc - 1.0);
      rep.add("mass_err_t" + format_double(t), err);
      worst = std::max(worst, err);
    }
    rep.measured = worst;
    finish(rep, t0, worst <= rep.tol);
    out.push_back(rep);
  }
  {
    const auto t0 = Clock::now();
    VerificationReport rep;
    rep.name = "kernel_positivity";
    rep.tol = 1e-6;
    rep.measured = std::max(0.0, -table.values.minCoeff() / table.peak());
    rep.add("tail_bound", table.tail);
    rep.add("edge_ratio", table.edge_ratio());
    rep.params = {{"m_max", table.m_max}, {"kernel_tol", table.tol}};
    finish(rep, t0, rep.measured <= rep.tol && table.tail <= table.tol);
    out.push_back(rep);
  }
  return out;
}

Reports pde_suite(const SuiteOptions& opt) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "pde_cross_validation";
  rep.tol = 5e-2;
  const auto& table = kernel_table(opt);
  const auto g = GridSpec::cube(32, 6.0, 32, 4.0);
  const auto u0 = SampledField::sample(g, [](double x, double y, double s) {
    return cplx(std::exp(-(x * x + y * y) - 4 * s * s));
  });
  std::vector<double> times{0.05, 0.1};
  if (opt.quick) times.resize(1);
  double worst = 0.0;
  for (double t : times) {
    const int steps = static_cast<int>(std::ceil(1.05 * t / fd_max_step(g)));
    const auto fd = fd_heat_oracle(u0, t, steps);
    const auto cv = convolve(u0, sample_heat_kernel(g, t, table));
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < u0.values.size(); ++i) {
      num += std::norm(fd.values[i] - cv.values[i]);
      den += std::norm(cv.values[i]);
    }
    const double err = std::sqrt(num / den);
    rep.add("rel_l2_err_t" + format_double(t), err);
    worst = std::max(worst, err);
  }
  rep.params = {{"n", 32}, {"times", times}};
  rep.measured = worst;
  finish(rep, t0, worst <= rep.tol);
  return {rep};
}

Reports partition_suite(const SuiteOptions&) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "partition";
  rep.tol = 1e-12;
  double worst = 0.0;
  long long overlaps = 0;
  for (int k : {1, 2}) {
    const auto part = build_partition(k, -4, 12);
    const double res = std::max({part.residual(), low_pass_residual(part), block_sum_residual(part)});
    rep.add("residual_k" + std::to_string(k), res);
    worst = std::max(worst, res);
    // blocks two or more apart never share a node
    for (int i = 0; i < 10000; ++i) {
      const double tau = std::pow(4.0, -5.0 + 19.0 * i / 9999.0);
      for (int j = -4; j <= 12; ++j)
        for (int l = j + 2; l <= 12; ++l) overlaps += part.block(j, tau) * part.block(l, tau) != 0.0;
    }
  }
  rep.add("overlaps", static_cast<double>(overlaps));
  rep.params = {{"nodes", 10000}, {"j", {-4, 12}}};
  rep.measured = worst;
  finish(rep, t0, worst <= rep.tol && overlaps == 0);
  return {rep};
}

Reports bernstein_suite(const SuiteOptions& opt) {
  Reports out;
  const auto g = SpectralGrid::make({1, 8, 0x1p-10, 0x1p10, 16});
  BernsteinOptions bo;
  if (opt.j_range) {
    bo.j_set.clear();
    for (int j = opt.j_range->first; j <= opt.j_range->second; ++j) bo.j_set.push_back(j);
  }
  const auto family = ring_family(bo.ring, opt.quick ? 2 : 4, 3, opt.seed);
  for (double rho : {1.0, 2.0})
    for (double p : {2.0, kInf}) out.push_back(bernstein_check(g, rho, p, family, bo));
  return out;
}

Reports decay_suite(const SuiteOptions& opt) {
  Reports out;
  const auto g = verify_grid();
  const auto [lo, hi] = opt.j_range.value_or(std::pair{0, 3});
  IndexedProfiles blocks;
  for (int j = lo; j <= hi; ++j) {
    FamilyParams fp;
    fp.j = j;
    blocks.emplace_back(j, family_profile(g, "localized-ring", fp));
  }
  for (double p : {2.0, kInf}) out.push_back(decay_check(blocks, p));
  return out;
}

Reports characterization_suite(const SuiteOptions& opt) {
  Reports out;
  const auto g = verify_grid();
  const auto part = build_partition(1, -6, 8);
  std::vector<RadialProfile> base;
  for (int q = opt.quick ? 0 : -1; q <= (opt.quick ? 2 : 3); ++q) {
    FamilyParams fp;
    fp.j = q;
    base.push_back(family_profile(g, "localized-ring", fp));
  }
  const std::vector<int> dilates = opt.quick ? std::vector<int>{-1, 0, 1} : std::vector<int>{-2, -1, 0, 1, 2};
  RadialProfile sum = base.front();
  for (size_t i = 1; i < base.size(); ++i) sum = sum + base[i];
  for (double s : {0.5, 1.0}) {
    const auto tg = tgrid_for(-2, 4, s + 1.0, 1e-8);
    out.push_back(tgrid_self_test(tg, s, sum, part, -2, 4));
  }
  struct Case {
    double s, p, r;
  };
  for (const auto& c : {Case{0.5, 2.0, 2.0}, Case{1.0, 2.0, kInf}, Case{0.5, kInf, kInf}}) {
    const auto tg = tgrid_for(-6, 8, c.s * std::min(c.r, 2.0), 1e-6);
    out.push_back(heat_characterization(base, dilates, c.s, c.p, c.r, part, tg));
  }
  return out;
}

Reports refined_sobolev_suite(const SuiteOptions& opt) {
  const auto g = verify_grid();
  FamilyParams narrow;
  narrow.j = 1;
  narrow.modes = 1;
  const std::vector<ScaleParts> family{family_parts(g, "localized-ring"), family_parts(g, "localized-ring", narrow),
                                       family_parts(g, "two-bump")};
  const std::vector<int> dilates = opt.quick ? std::vector<int>{0, 1} : std::vector<int>{-1, 0, 1};
  const auto tg = tgrid_for(-4, 8, 0.75, 1e-6);
  auto rs = refined_sobolev_check(family, dilates, 0.5, 2.0, tg);
  // the two-bump member must gain more from the Besov factor than either bump
  const double gain_two = rs.get("gain_b2");
  const bool gains = gain_two < 1.0 && gain_two < std::min(rs.get("gain_b0"), rs.get("gain_b1"));
  rs.add("two_bump_gain_below_singles", gains ? 1.0 : 0.0);
  rs.pass = rs.pass && gains;
  return {rs, besov_embedding_check(family, dilates, 2.0, tg)};
}

Reports maximal_suite(const SuiteOptions& opt) {
  Reports out;
  std::vector<GridSpec> grids;
  for (int n : {16, 32, 64, 128}) grids.push_back(GridSpec::cube(n, 6.0, n, 8.0));
  out.push_back(ball_volume_check(grids, 1.0));

  const auto g = GridSpec::cube(33, 6.0, 32, 8.0);
  const auto f = SampledField::sample(g, [](double x, double y, double s) {
    return cplx(std::exp(-(x * x + y * y) - s * s) +
                0.5 * std::exp(-2 * ((x - 1) * (x - 1) + y * y) - 4 * (s - 1) * (s - 1)));
  });
  out.push_back(maximal_convolution_check(f, sample_heat_kernel(g, 0.1, kernel_table(opt))));

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  SampledField noise(g);
  for (auto& v : noise.values) v = uni(rng);
  SampledField spike(g);
  spike.at(16, 16, 16) = 1.0;
  const std::vector<SampledField> fields{f, noise, spike};
  for (double p : opt.quick ? std::vector<double>{2.0} : std::vector<double>{2.0, 4.0})
    out.push_back(maximal_lp_check(fields, p, default_radii(g)));
  return out;
}

using SuiteFn = Reports (*)(const SuiteOptions&);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> r{
      {"plancherel", plancherel_suite},
      {"roundtrip", roundtrip_suite},
      {"eigen", eigen_suite},
      {"heat", heat_suite},
      {"pde", pde_suite},
      {"partition", partition_suite},
      {"bernstein", bernstein_suite},
      {"decay", decay_suite},
      {"characterization", characterization_suite},
      {"refined_sobolev", refined_sobolev_suite},
      {"maximal", maximal_suite},
  };
  return r;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : registry()) out.push_back(name);
  return out;
}

std::vector<VerificationReport> run_suite(const std::string& name, const SuiteOptions& opt) {
  Reports out;
  for (const auto& [n, fn] : registry()) {
    if (name != "all" && name != n) continue;
    auto reps = fn(opt);
    out.insert(out.end(), reps.begin(), reps.end());
    if (name != "all") return out;
  }
  if (out.empty()) throw DomainError("unknown suite '" + name + "'");
  return out;
}

}  // namespace heisen
