#include "heisen/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "heisen/csv.hpp"
#include "heisen/error.hpp"
#include "heisen/group.hpp"
#include "heisen/heat.hpp"

namespace heisen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Gamma(a, x) / Gamma(a), bounded from above; 1 when no bound applies.
double upper_tail(double a, double x) {
  if (x <= 0.0) return 1.0;
  double b;
  if (a <= 1.0)
    b = std::pow(x, a - 1.0) * std::exp(-x);
  else if (x > 2.0 * (a - 1.0))
    b = 2.0 * std::pow(x, a - 1.0) * std::exp(-x);
  else
    return 1.0;
  return std::min(1.0, b / std::tgamma(a));
}

// int_0^x u^a e^{-u} du/u / Gamma(a) <= x^a / (a Gamma(a))
double lower_tail(double a, double x) { return std::min(1.0, std::pow(x, a) / (a * std::tgamma(a))); }

RadialProfile sum_of(const ScaleParts& parts) {
  if (parts.empty()) throw DomainError("empty list of parts");
  RadialProfile out = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) out = out + parts[i];
  return out;
}

ScaleParts heat_apply(const ScaleParts& parts, double t) {
  ScaleParts out;
  for (const auto& u : parts) out.push_back(heisen::heat_apply(u, t));
  return out;
}

// ||v||_p for functions sharing the support pattern of u. Split functions
// go through split_lp_norm.
class FlowNorm {
 public:
  FlowNorm(const ScaleParts& u, double exponent, const QuadratureHints& hints) : exponent_(exponent), hints_(hints) {
    if (!(exponent >= 1.0)) throw DomainError("norm exponent must be >= 1");
    const auto sum = sum_of(u);
    if (exponent != 2.0 && u.size() == 1 && !sum.is_zero()) synth_.emplace(sum, quadrature_for(sum, hints));
  }
  double operator()(const ScaleParts& v) const {
    const auto sum = sum_of(v);
    if (sum.is_zero()) return 0.0;
    if (exponent_ == 2.0) return plancherel_norm(sum);
    if (!synth_) return split_lp_norm(v, exponent_, hints_);
    auto f = (*synth_)(sum);
    return std::isinf(exponent_) ? refine_sup(sum, f) : radial_lp_norm(f, exponent_);
  }
  FlowNorm(const RadialProfile& u, double exponent, const QuadratureHints& hints)
      : FlowNorm(ScaleParts{u}, exponent, hints) {}
  double operator()(const RadialProfile& v) const { return (*this)(ScaleParts{v}); }

 private:
  double exponent_;
  QuadratureHints hints_;
  std::optional<Synthesizer> synth_;
};

RadialProfile dilated(const RadialProfile& u, int k) { return k == 0 ? u : dilate_profile(u, k); }

ScaleParts dilated(const ScaleParts& parts, int k) {
  ScaleParts out;
  for (const auto& u : parts) out.push_back(dilated(u, k));
  return out;
}

struct FlowSup {
  double peak = 0.0;
  size_t at = 0;
  double first = 0.0, last = 0.0;  // values at the grid ends
};

// max_i t_i^a ||e^{t_i Delta} u||_p. The heat flow contracts every L^p, and
// for p = inf the spectral sup bound also applies, so nodes whose bound
// cannot beat the running max are skipped without changing the result.
FlowSup flow_sup(const ScaleParts& u, double a, const TGrid& tg, double exponent, const QuadratureHints& hints) {
  FlowNorm norm(u, exponent, hints);
  const size_t n = tg.t.size();
  const double n0 = norm(u);
  auto value = [&](size_t i) { return std::pow(tg.t[i], a) * norm(heat_apply(u, tg.t[i])); };
  std::vector<std::pair<double, size_t>> bound(n);
  for (size_t i = 0; i < n; ++i) {
    double b = n0;
    if (std::isinf(exponent)) b = std::min(b, sup_bound(heisen::heat_apply(sum_of(u), tg.t[i])));
    bound[i] = {std::pow(tg.t[i], a) * b, i};
  }
  FlowSup out;
  out.first = value(0);
  out.last = value(n - 1);
  out.peak = out.first;
  if (out.last > out.peak) {
    out.peak = out.last;
    out.at = n - 1;
  }
  std::sort(bound.begin(), bound.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (auto [b, i] : bound) {
    if (b <= out.peak) break;
    if (i == 0 || i == n - 1) continue;
    const double v = value(i);
    if (v > out.peak) {
      out.peak = v;
      out.at = i;
    }
  }
  return out;
}

// Shared driver for the dilation families: ratio per (base, dilate), drift
// relative to the undilated member.
struct DilationSweep {
  std::vector<double> ratios;
  double drift = 0.0;
};

template <class T, class F>
DilationSweep sweep_dilates(const std::vector<T>& base, const std::vector<int>& dilates,
                            VerificationReport& rep, const char* key, F&& ratio_of) {
  if (base.empty() || dilates.empty()) throw DomainError(rep.name + ": empty family");
  DilationSweep out;
  for (size_t i = 0; i < base.size(); ++i) {
    double ref = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> row;
    for (int k : dilates) {
      const double v = ratio_of(dilated(base[i], k), i, k);
      row.push_back(v);
      out.ratios.push_back(v);
      rep.add(std::string(key) + "_b" + std::to_string(i) + "_k" + std::to_string(k), v);
      if (k == 0) ref = v;
    }
    if (std::isnan(ref)) ref = row.front();
    for (double v : row) out.drift = std::max(out.drift, std::abs(v / ref - 1.0));
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// t-grid

TGrid TGrid::make(int k_lo, int k_hi, int per) {
  if (k_hi <= k_lo || per < 1) throw DomainError("TGrid: need k_lo < k_hi and per >= 1");
  TGrid g;
  g.k_lo = k_lo;
  g.k_hi = k_hi;
  g.per = per;
  const int n = (k_hi - k_lo) * per + 1;
  const double du = std::log(4.0) / per;
  for (int i = 0; i < n; ++i) {
    g.t.push_back(std::pow(4.0, k_lo + static_cast<double>(i) / per));
    g.w.push_back((i == 0 || i == n - 1) ? 0.5 * du : du);
  }
  return g;
}

TGrid tgrid_for(int j_min, int j_max, double a, double tol, int per) {
  if (!(a > 0.0)) throw DomainError("tgrid_for: exponent must be positive");
  if (j_max < j_min) throw DomainError("tgrid_for: empty block range");
  const double mu_lo = 4.0 * std::pow(4.0, j_min), mu_hi = 32.0 * std::pow(4.0, j_max);
  int k_lo = -(j_max + 2), k_hi = 2 - j_min;
  while (lower_tail(a, std::pow(4.0, k_lo) * mu_hi) > tol) --k_lo;
  while (upper_tail(a, std::pow(4.0, k_hi) * mu_lo) > tol) ++k_hi;
  return TGrid::make(k_lo, k_hi, per);
}

double reproducing_weight(const TGrid& tg, double s, double mu) {
  double acc = 0.0;
  for (size_t i = 0; i < tg.t.size(); ++i) {
    const double x = tg.t[i] * mu;
    acc += tg.w[i] * std::exp((s + 1.0) * std::log(x) - x);
  }
  return acc / std::tgamma(s + 1.0);
}

VerificationReport tgrid_self_test(const TGrid& tg, double s, const RadialProfile& u, const DyadicPartition& part,
                                   int j_min, int j_max) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "tgrid_reproducing";
  rep.params = {{"s", s}, {"j_min", j_min}, {"j_max", j_max}, {"t_min", tg.t_min()}, {"t_max", tg.t_max()},
                {"nodes", tg.t.size()}};
  rep.tol = 1e-3;
  const int d = u.grid().d();
  double scalar = 0.0;
  const double lo = std::log(4.0 * std::pow(4.0, j_min)), hi = std::log(32.0 * std::pow(4.0, j_max));
  for (int i = 0; i <= 400; ++i)
    scalar = std::max(scalar, std::abs(reproducing_weight(tg, s, std::exp(lo + (hi - lo) * i / 400)) - 1.0));
  rep.add("scalar_error", scalar);
  double worst = 0.0;
  for (int j = j_min; j <= j_max; ++j) {
    auto b = project_block(u, j, part);
    if (b.is_zero()) continue;
    auto rebuilt = multiplier(b, [&](int m, double lam) { return cplx(reproducing_weight(tg, s, eigenvalue(m, lam, d))); });
    const double err = (rebuilt.values() - b.values()).cwiseAbs().maxCoeff() / b.values().cwiseAbs().maxCoeff();
    rep.add("block_error_j" + std::to_string(j), err);
    worst = std::max(worst, err);
  }
  rep.measured = std::max(worst, scalar);
  rep.pass = rep.all_finite() && rep.measured <= rep.tol;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

std::vector<double> heat_flow_norms(const RadialProfile& u, const std::vector<double>& t, double exponent,
                                    const QuadratureHints& hints) {
  FlowNorm norm(u, exponent, hints);
  std::vector<double> out;
  out.reserve(t.size());
  for (double ti : t) out.push_back(norm(heat_apply(u, ti)));
  return out;
}

// ---------------------------------------------------------------------------
// Decay of frequency-localized data

VerificationReport decay_check(const IndexedProfiles& blocks, double exponent, const DecayOptions& opt) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "decay";
  std::vector<int> js;
  for (const auto& b : blocks) js.push_back(b.first);
  rep.params = {{"p", json_number(exponent)},
                {"j", js},
                {"nodes", opt.tau.size()}};
  rep.tol = opt.uniformity_tol;
  if (blocks.empty()) throw DomainError("decay_check: no blocks");

  std::vector<double> kappa;
  std::vector<std::vector<std::pair<double, double>>> samples;
  for (const auto& [j, u] : blocks) {
    if (u.is_zero()) throw DomainError("decay_check: zero profile at j=" + std::to_string(j));
    FlowNorm norm(u, exponent, opt.hints);
    const double n0 = norm(u);
    std::vector<std::pair<double, double>> pts;  // (tau, ratio)
    for (double tau : opt.tau) {
      const double ratio = norm(heat_apply(u, tau * std::pow(4.0, -j))) / n0;
      if (std::isfinite(ratio) && ratio > opt.floor) pts.emplace_back(tau, ratio);
    }
    if (pts.size() < 4)
      throw DomainError("decay_check: fewer than 4 usable t-nodes at j=" + std::to_string(j));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, r] : pts) {
      const double y = std::log(r);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(pts.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / n;
    kappa.push_back(-slope);
    samples.push_back(std::move(pts));
    const std::string tag = "_j" + std::to_string(j);
    rep.add("rate" + tag, -slope * std::pow(4.0, j));
    rep.add("scaled_rate" + tag, -slope);
    rep.add("C" + tag, std::exp(icept));
  }
  const double kmin = *std::min_element(kappa.begin(), kappa.end());
  const double kmax = *std::max_element(kappa.begin(), kappa.end());
  rep.measured = kmin > 0.0 ? kmax / kmin : kInf;
  rep.fitted_c = kmin;
  double C = 0.0;
  for (const auto& pts : samples)
    for (auto [tau, r] : pts) C = std::max(C, r * std::exp(kmin * tau));
  rep.fitted_C = C;
  rep.pass = rep.all_finite() && kmin > 0.0 && rep.measured <= rep.tol;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------
// Heat-flow characterization of negative Besov norms

CharacterizationValue heat_characterization_value(const RadialProfile& u, double s, double exponent, double r,
                                                  const DyadicPartition& part, const TGrid& tg,
                                                  const CharacterizationOptions& opt) {
  if (!(s > 0.0)) throw DomainError("heat_characterization: s must be positive");
  if (!(r >= 1.0)) throw DomainError("heat_characterization: r must be >= 1");
  CharacterizationValue v;
  v.lhs = besov_norm(u, {-2.0 * s, exponent, r}, part, opt.norm);
  double tail;
  if (std::isinf(r)) {
    const auto fs = flow_sup(ScaleParts{u}, s, tg, exponent, opt.norm.hints);
    v.rhs = fs.peak;
    tail = std::max(fs.first, fs.last) / fs.peak;
  } else {
    const auto norms = heat_flow_norms(u, tg.t, exponent, opt.norm.hints);
    std::vector<double> g(norms.size());
    for (size_t i = 0; i < g.size(); ++i) g[i] = std::pow(tg.t[i], s) * norms[i];
    double acc = 0.0;
    for (size_t i = 0; i < g.size(); ++i) acc += tg.w[i] * std::pow(g[i], r);
    v.rhs = std::pow(acc, 1.0 / r);
    // g ~ t^s at the small end; the large end decays at least geometrically
    const double du = std::log(4.0) / tg.per;
    tail = (std::pow(g.front(), r) / (s * r) + std::pow(g.back(), r) * du) / acc;
  }
  if (tail > opt.tail_tolerance)
    throw DomainError("heat_characterization: t-range insufficient (tail share " + format_double(tail) + ")");
  return v;
}

VerificationReport heat_characterization(const std::vector<RadialProfile>& base, const std::vector<int>& dilates,
                                         double s, double exponent, double r, const DyadicPartition& part,
                                         const TGrid& tg, const CharacterizationOptions& opt) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "heat_characterization";
  rep.params = {{"s", s}, {"p", json_number(exponent)}, {"r", json_number(r)}, {"family", base.size()}, {"dilates", dilates}};
  rep.tol = opt.drift_tol;
  auto sweep = sweep_dilates(base, dilates, rep, "ratio", [&](const RadialProfile& u, size_t, int) {
    return heat_characterization_value(u, s, exponent, r, part, tg, opt).ratio();
  });
  const double lo = *std::min_element(sweep.ratios.begin(), sweep.ratios.end());
  const double hi = *std::max_element(sweep.ratios.begin(), sweep.ratios.end());
  rep.measured = sweep.drift;
  rep.fitted_c = lo;
  rep.fitted_C = std::max(hi, 1.0 / lo);
  rep.pass = rep.all_finite() && lo > 0.0 && rep.measured <= rep.tol;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------
// Refined Sobolev inequality

namespace {

// sup over the t-grid of t^a ||e^{t Delta} u||_inf; the sup must be interior.
double heat_sup(const ScaleParts& u, double a, const TGrid& tg, const QuadratureHints& hints) {
  const auto fs = flow_sup(u, a, tg, kInf, hints);
  if (fs.at == 0 || fs.at + 1 == tg.t.size()) throw DomainError("heat-flow sup sits at the end of the t-grid");
  return fs.peak;
}

}  // namespace

RefinedSobolevValue refined_sobolev_value(const ScaleParts& parts, double s, double exponent, const TGrid& tg,
                                          const SobolevOptions& opt) {
  if (parts.empty()) throw DomainError("refined_sobolev: no parts");
  RadialProfile f = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) f = f + parts[i];
  const int d = f.grid().d();
  const double N = homogeneous_dim(d);
  if (!(s > 0.0) || !(exponent >= 1.0) || !(s < N / exponent))
    throw DomainError("refined_sobolev: need 0 < s < N/p");
  RefinedSobolevValue v;
  const double q = exponent * N / (N - exponent * s);
  v.theta = s * exponent / N;
  v.lq = parts.size() == 1 ? profile_norm(f, q, opt.norm) : split_lp_norm(parts, q, opt.norm.hints);
  v.sobolev = sobolev_norm(f, s, exponent, opt.norm);
  v.besov = heat_sup(parts, 0.5 * (N / exponent - s), tg, opt.norm.hints);
  return v;
}

RefinedSobolevValue refined_sobolev_value(const RadialProfile& f, double s, double exponent, const TGrid& tg,
                                          const SobolevOptions& opt) {
  return refined_sobolev_value(ScaleParts{f}, s, exponent, tg, opt);
}

VerificationReport refined_sobolev_check(const std::vector<ScaleParts>& base, const std::vector<int>& dilates,
                                         double s, double exponent, const TGrid& tg, const SobolevOptions& opt) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "refined_sobolev";
  const double N = base.empty() || base.front().empty() ? 4.0 : homogeneous_dim(base.front().front().grid().d());
  rep.params = {{"s", s}, {"p", json_number(exponent)}, {"q", exponent * N / (N - exponent * s)}, {"family", base.size()},
                {"dilates", dilates}};
  rep.tol = opt.drift_tol;
  auto sweep = sweep_dilates(base, dilates, rep, "ratio", [&](const ScaleParts& u, size_t i, int k) {
    const auto v = refined_sobolev_value(u, s, exponent, tg, opt);
    if (k == 0) rep.add("gain_b" + std::to_string(i), v.gain());
    return v.ratio();
  });
  rep.measured = sweep.drift;
  rep.fitted_c = *std::min_element(sweep.ratios.begin(), sweep.ratios.end());
  rep.fitted_C = *std::max_element(sweep.ratios.begin(), sweep.ratios.end());
  rep.pass = rep.all_finite() && rep.measured <= rep.tol;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

VerificationReport besov_embedding_check(const std::vector<ScaleParts>& base, const std::vector<int>& dilates,
                                         double exponent, const TGrid& tg, const SobolevOptions& opt) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "besov_embedding";
  rep.params = {{"p", json_number(exponent)}, {"family", base.size()}, {"dilates", dilates}};
  rep.tol = opt.drift_tol;
  auto sweep = sweep_dilates(base, dilates, rep, "ratio", [&](const ScaleParts& u, size_t, int) {
    const double N = homogeneous_dim(u.front().grid().d());
    return heat_sup(u, 0.5 * N / exponent, tg, opt.norm.hints) / FlowNorm(u, exponent, opt.norm.hints)(u);
  });
  rep.measured = sweep.drift;
  rep.fitted_c = *std::min_element(sweep.ratios.begin(), sweep.ratios.end());
  rep.fitted_C = *std::max_element(sweep.ratios.begin(), sweep.ratios.end());
  rep.pass = rep.all_finite() && rep.measured <= rep.tol;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------
// Maximal function

double grid_resolution(const GridSpec& g) { return std::max({g.hx(), g.hy(), std::sqrt(g.hs())}); }

std::vector<double> default_radii(const GridSpec& g) {
  const double cap = std::min({0.5 * g.lx, 0.5 * g.ly, std::sqrt(0.5 * g.ls)});
  std::vector<double> out;
  for (int k = 1;; ++k) {
    const double R = std::pow(2.0, 0.5 * k) * grid_resolution(g);
    if (R > cap) break;
    out.push_back(R);
  }
  if (out.empty()) throw DomainError("default_radii: grid too coarse for any ball");
  return out;
}

namespace {

// Index range [lo, hi] of s nodes strictly inside (c - half, c + half).
std::pair<int, int> s_range(const GridSpec& g, double c, double half) {
  const double s0 = -0.5 * g.ls, hs = g.hs();
  int lo = static_cast<int>(std::floor((c - half - s0) / hs)) + 1;
  int hi = static_cast<int>(std::ceil((c + half - s0) / hs)) - 1;
  return {std::max(lo, 0), std::min(hi, g.ns - 1)};
}

}  // namespace

long long ball_count(const GridSpec& g, double x, double y, double s, double R) {
  const double R2 = R * R, R4 = R2 * R2;
  long long count = 0;
  for (int i = 0; i < g.nx; ++i) {
    const double dx = g.x(i) - x;
    if (std::abs(dx) >= R) continue;
    for (int j = 0; j < g.ny; ++j) {
      const double dy = g.y(j) - y;
      const double q = dx * dx + dy * dy;
      if (q >= R2) continue;
      const double c = s + 2.0 * (y * g.x(i) - x * g.y(j));
      auto [lo, hi] = s_range(g, c, std::sqrt(R4 - q * q));
      if (hi >= lo) count += hi - lo + 1;
    }
  }
  return count;
}

SampledField maximal_function(const SampledField& f, const std::vector<double>& radii) {
  const auto& g = f.grid;
  if (radii.empty()) throw DomainError("maximal_function: no radii");
  if (!std::is_sorted(radii.begin(), radii.end()) || !(radii.front() > 0.0))
    throw DomainError("maximal_function: radii must be positive and sorted");
  if (!(radii.front() > grid_resolution(g)))
    throw DomainError("maximal_function: smallest radius " + format_double(radii.front()) +
                      " holds no node besides the center (grid resolution " + format_double(grid_resolution(g)) + ")");
  // prefix sums of |f| along s for every (x, y) column
  const int ns = g.ns;
  std::vector<double> prefix(static_cast<size_t>(g.nx) * g.ny * (ns + 1), 0.0);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      double* p = &prefix[(static_cast<size_t>(i) * g.ny + j) * (ns + 1)];
      for (int k = 0; k < ns; ++k) p[k + 1] = p[k] + std::abs(f.at(i, j, k));
    }
  SampledField out(g);
  const double hx = g.hx(), hy = g.hy();
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < ns; ++k) {
        const double x = g.x(i), y = g.y(j), s = g.s(k);
        double best = 0.0;
        for (double R : radii) {
          const double R2 = R * R, R4 = R2 * R2;
          const int di = static_cast<int>(R / hx) + 1, dj = static_cast<int>(R / hy) + 1;
          double sum = 0.0;
          long long count = 0;
          for (int a = std::max(0, i - di); a <= std::min(g.nx - 1, i + di); ++a) {
            const double dx = g.x(a) - x;
            for (int b = std::max(0, j - dj); b <= std::min(g.ny - 1, j + dj); ++b) {
              const double dy = g.y(b) - y;
              const double q = dx * dx + dy * dy;
              if (q >= R2) continue;
              auto [lo, hi] = s_range(g, s + 2.0 * (y * g.x(a) - x * g.y(b)), std::sqrt(R4 - q * q));
              if (hi < lo) continue;
              const double* p = &prefix[(static_cast<size_t>(a) * g.ny + b) * (ns + 1)];
              sum += p[hi + 1] - p[lo];
              count += hi - lo + 1;
            }
          }
          if (count > 0) best = std::max(best, sum / static_cast<double>(count));
        }
        out.at(i, j, k) = best;
      }
  return out;
}

VerificationReport maximal_lp_check(const std::vector<SampledField>& fields, double exponent,
                                    const std::vector<double>& radii, double max_constant) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "maximal_lp";
  rep.params = {{"p", json_number(exponent)}, {"fields", fields.size()}, {"radii", radii.size()}};
  rep.tol = max_constant;
  if (fields.empty()) throw DomainError("maximal_lp_check: no fields");
  if (!(exponent > 1.0)) throw DomainError("maximal_lp_check: p must be > 1");
  double worst = 0.0;
  for (size_t i = 0; i < fields.size(); ++i) {
    const double n = lp_norm(fields[i], exponent);
    if (!(n > 0.0)) throw DomainError("maximal_lp_check: zero field");
    const double ratio = lp_norm(maximal_function(fields[i], radii), exponent) / n;
    rep.add("ratio_f" + std::to_string(i), ratio);
    worst = std::max(worst, ratio);
  }
  rep.measured = worst;
  rep.fitted_C = worst;
  rep.pass = rep.all_finite() && worst <= max_constant;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

VerificationReport ball_volume_check(const std::vector<GridSpec>& grids, double R, double tol) {
  const auto t0 = Clock::now();
  VerificationReport rep;
  rep.name = "ball_volume";
  rep.params = {{"R", R}, {"grids", grids.size()}};
  rep.tol = tol;
  if (grids.empty()) throw DomainError("ball_volume_check: no grids");
  double ratio = 0.0;
  for (const auto& g : grids) {
    if (2.0 * R > 0.5 * std::min(g.lx, g.ly) || 4.0 * R * R > 0.5 * g.ls)
      throw DomainError("ball_volume_check: B(0, 2R) does not fit the grid");
    const long long c1 = ball_count(g, 0.0, 0.0, 0.0, R), c2 = ball_count(g, 0.0, 0.0, 0.0, 2.0 * R);
    if (c1 == 0) throw DomainError("ball_volume_check: empty ball");
    ratio = static_cast<double>(c2) / static_cast<double>(c1);
    rep.add("ratio_n" + std::to_string(g.nx), ratio);
    // the unit gauge ball of H^1 has volume pi^2 / 2
    rep.add("volume_n" + std::to_string(g.nx),
            c1 * g.hx() * g.hy() * g.hs() / (0.5 * std::numbers::pi * std::numbers::pi * std::pow(R, 4)));
  }
  rep.measured = std::abs(ratio / 16.0 - 1.0);
  rep.fitted_C = ratio;
  rep.pass = rep.all_finite() && rep.measured <= rep.tol;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

VerificationReport maximal_convolution_check(const SampledField& f, const SampledField& phi, const MaximalOptions& opt) {
  const auto t0 = Clock::now();
  const auto& g = f.grid;
  if (!(phi.grid == g)) throw DomainError("maximal_convolution_check: grid mismatch");
  VerificationReport rep;
  rep.name = "maximal_convolution";
  const auto radii = opt.radii.empty() ? default_radii(g) : opt.radii;
  rep.params = {{"n", g.nx}, {"radii", radii.size()}};
  rep.tol = opt.slack;

  // radially decreasing majorant: running max of |phi| from the outside in
  std::vector<std::pair<double, size_t>> order;
  order.reserve(phi.values.size());
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.ns; ++k) {
        const double r2 = g.x(i) * g.x(i) + g.y(j) * g.y(j);
        order.emplace_back(std::pow(r2 * r2 + g.s(k) * g.s(k), 0.25), g.index(i, j, k));
      }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> psi(phi.values.size());
  double run = 0.0;
  for (size_t n = 0; n < order.size();) {
    size_t m = n;
    while (m < order.size() && order[m].first == order[n].first) run = std::max(run, std::abs(phi.values[order[m++].second]));
    for (; n < m; ++n) psi[order[n].second] = run;
  }
  double psi_l1 = 0.0, phi_l1 = 0.0, edge = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.ns; ++k) {
        const size_t n = g.index(i, j, k);
        psi_l1 += psi[n] * g.cell_volume(i, j);
        phi_l1 += std::abs(phi.values[n]) * g.cell_volume(i, j);
        if (i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1 || k == 0) edge = std::max(edge, psi[n]);
      }
  if (edge > opt.edge_tolerance * run)
    throw DomainError("maximal_convolution_check: majorant not integrable on the grid range (edge/peak " +
                      format_double(edge / run) + ")");
  rep.add("psi_l1", psi_l1);
  rep.add("phi_l1", phi_l1);

  auto conv = convolve(f, phi, {opt.g_floor});
  auto mf = maximal_function(f, radii);
  double rhs_max = 0.0, worst = -kInf, constant = 0.0;
  for (auto v : mf.values) rhs_max = std::max(rhs_max, psi_l1 * v.real());
  long long violations = 0;
  for (size_t n = 0; n < conv.values.size(); ++n) {
    const double lhs = std::abs(conv.values[n]), m = mf.values[n].real();
    const double rhs = psi_l1 * m;
    if (lhs > rhs * (1.0 + opt.slack)) ++violations;
    worst = std::max(worst, (lhs - rhs) / rhs_max);
    if (m > 0.0) constant = std::max(constant, lhs / m);
  }
  rep.add("violations", static_cast<double>(violations));
  rep.measured = worst;
  rep.fitted_C = constant;
  rep.pass = rep.all_finite() && violations == 0;
  rep.runtime_s = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------
// Function families

std::vector<std::string> family_names() { return {"zero", "gaussian", "one-mode", "localized-ring", "two-bump"}; }

ScaleParts family_parts(const GridPtr& grid, const std::string& family, const FamilyParams& fp) {
  if (!grid) throw DomainError("family_profile: null grid");
  const auto& g = *grid;
  const int d = g.d();
  const int modes = std::clamp(fp.modes, 1, g.m_max());
  std::vector<cplx> weights;
  for (int m = 0; m < modes; ++m) weights.push_back(std::ldexp(1.0, -m));
  const Ring ring{1.0, 2.25};
  RadialProfile out;
  if (family == "zero") {
    out = RadialProfile(grid);
  } else if (family == "one-mode") {
    const double target = std::pow(4.0, fp.j);
    size_t best = 0;
    for (size_t k = 0; k < g.size(); ++k)
      if (g.lambda(k) > 0 && std::abs(std::log(g.lambda(k) / target)) < std::abs(std::log(std::abs(g.lambda(best)) / target)))
        best = k;
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(g.m_max() + 1, g.size());
    v(0, best) = 1.0;
    out = RadialProfile(grid, v);
  } else if (family == "gaussian") {
    // heat profile e^{-4^{-j} mu} with the spectrum below 4^{j-2} cut smoothly
    const DyadicPartition cut(1, 0, 1);
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(g.m_max() + 1, g.size());
    for (int m = 0; m < modes; ++m)
      for (size_t k = 0; k < g.size(); ++k) {
        const double tau = (2.0 * m + d) * std::abs(g.lambda(k));
        const double x = std::ldexp(tau, 2 * (2 - fp.j));
        const double val = weights[m].real() * std::exp(-std::ldexp(4.0 * tau, -2 * fp.j)) * (1.0 - cut.chi(x));
        if (val > 1e-20) v(m, k) = val;
      }
    out = RadialProfile(grid, v);
  } else if (family == "localized-ring") {
    out = make_localized(grid, fp.j, ring, ring_bump(ring), weights);
  } else if (family == "two-bump") {
    auto u = make_localized(grid, fp.j, ring, ring_bump(ring), weights);
    const double N = homogeneous_dim(d);
    return dilated(ScaleParts{u, std::pow(2.0, fp.gap * (N / fp.p - fp.s)) * dilate_profile(u, fp.gap)}, fp.dilate);
  } else {
    throw DomainError("unknown function family '" + family + "'");
  }
  return {dilated(out, fp.dilate)};
}

RadialProfile family_profile(const GridPtr& grid, const std::string& family, const FamilyParams& fp) {
  const auto parts = family_parts(grid, family, fp);
  RadialProfile out = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) out = out + parts[i];
  return out;
}

GridPtr verify_grid(int d) { return SpectralGrid::make({d, 8, 0x1p-12, 0x1p12, 32}); }

}  // namespace heisen
