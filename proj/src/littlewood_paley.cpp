#include "heisen/littlewood_paley.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>
#include <random>

#include "heisen/csv.hpp"
#include "heisen/error.hpp"

namespace heisen {

namespace {

double spectrum_tau(int m, double lambda, int d, int j) { return std::ldexp((2.0 * m + d) * std::abs(lambda), -2 * j); }

double log_node(double lo, double hi, int i, int n) {
  return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
}

}  // namespace

// ---------------------------------------------------------------------------
// Partition

DyadicPartition::DyadicPartition(int smoothness, int j_min, int j_max)
    : smoothness_(smoothness), j_min_(j_min), j_max_(j_max) {
  if (smoothness < 1 || smoothness > 4) throw DomainError("partition: smoothness must be in [1, 4]");
  if (j_min > j_max) throw DomainError("partition: empty block range");
  if (j_min < -30 || j_max > 30) throw DomainError("partition: block range outside [-30, 30]");
  for (int i = 0; i <= 4000; ++i) {
    const double tau = 20.0 * i / 4000;
    const double v = rstar(tau), c = chi(tau);
    if (v < 0.0 || v > 1.0 || c < 0.0 || c > 1.0) throw ToleranceError("partition: values leave [0, 1]");
    if (v != 0.0 && (tau < kSupportLo || tau > kSupportHi)) throw ToleranceError("partition: R* support leaves [1, 8]");
  }
  residual_ = std::max(low_pass_residual(*this), block_sum_residual(*this));
  if (!(residual_ <= 1e-12)) throw ToleranceError("partition: residual " + format_double(residual_) + " above 1e-12");
}

double DyadicPartition::chi(double tau) const {
  const double a = std::abs(tau);
  if (a <= 1.0) return 1.0;
  if (a >= 2.0) return 0.0;
  auto glue = [&](double x) { return std::exp(-1.0 / std::pow(x, smoothness_)); };
  const double up = glue(2.0 - a), down = glue(a - 1.0);
  return up / (up + down);
}

void DyadicPartition::write_csv(std::ostream& os, int samples) const {
  os << "tau,chi,rstar\n";
  for (int i = 0; i < samples; ++i) {
    const double tau = 16.0 * i / (samples - 1);
    os << format_double(tau) << ',' << format_double(chi(tau)) << ',' << format_double(rstar(tau)) << '\n';
  }
}

double low_pass_residual(const DyadicPartition& part, int nodes) {
  const int top = std::max(part.j_max(), 0);
  double worst = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double tau = log_node(1e-4, std::ldexp(1.0, 2 * (top + 1)), i, nodes);
    double sum = part.low(tau);
    for (int j = 0; j <= top; ++j) sum += part.block(j, tau);
    worst = std::max(worst, std::abs(1.0 - sum));
  }
  return worst;
}

double block_sum_residual(const DyadicPartition& part, int nodes) {
  double worst = 0.0;
  const double lo = std::ldexp(DyadicPartition::kSupportLo * 2.0, 2 * part.j_min());
  const double hi = std::ldexp(1.0, 2 * (part.j_max() + 1));
  for (int i = 0; i < nodes; ++i) {
    const double tau = log_node(lo, hi, i, nodes);
    double sum = 0.0;
    for (int j = part.j_min(); j <= part.j_max(); ++j) sum += part.block(j, tau);
    worst = std::max(worst, std::abs(1.0 - sum));
  }
  return worst;
}

DyadicPartition build_partition(int smoothness, int j_min, int j_max) {
  return DyadicPartition(smoothness, j_min, j_max);
}

RadialProfile project_block(const RadialProfile& p, int j, const DyadicPartition& part) {
  const int d = p.grid().d();
  return multiplier(p, [&](int m, double lam) { return cplx(part.rstar(spectrum_tau(m, lam, d, j))); });
}

RadialProfile low_pass(const RadialProfile& p, int j, const DyadicPartition& part) {
  const int d = p.grid().d();
  return multiplier(p, [&](int m, double lam) { return cplx(part.low(spectrum_tau(m, lam, d, j))); });
}

// ---------------------------------------------------------------------------
// Norms

double profile_norm(const RadialProfile& p, double exponent, const NormOptions& opt) {
  if (!(exponent >= 1.0)) throw DomainError("norm: p must be >= 1");
  if (exponent == 2.0) return plancherel_norm(p);
  return profile_lp_norm(p, exponent, opt.hints);
}

BesovResult besov_blocks(const RadialProfile& p, const BesovParams& b, const DyadicPartition& part,
                         const NormOptions& opt) {
  if (!(b.p >= 1.0) || !(b.r >= 1.0)) throw DomainError("besov: p and r must be >= 1");
  BesovResult out;
  if (p.is_zero()) return out;
  RadialProfile covered(p.grid_ptr());
  std::vector<RadialProfile> blocks;
  for (int q = part.j_min(); q <= part.j_max(); ++q) {
    blocks.push_back(project_block(p, q, part));
    covered = covered + blocks.back();
  }
  out.tail_fraction = plancherel_norm(p - covered) / plancherel_norm(p);
  if (out.tail_fraction > opt.tail_tolerance)
    throw DomainError("besov: mass outside blocks [" + std::to_string(part.j_min()) + ", " +
                      std::to_string(part.j_max()) + "] is " + format_double(out.tail_fraction));
  double acc = 0.0;
  for (int q = part.j_min(); q <= part.j_max(); ++q) {
    const auto& blk = blocks[q - part.j_min()];
    if (blk.is_zero()) continue;
    const double n = profile_norm(blk, b.p, opt);
    out.blocks.emplace_back(q, n);
    const double term = std::pow(2.0, q * b.s) * n;
    acc = std::isinf(b.r) ? std::max(acc, term) : acc + std::pow(term, b.r);
  }
  out.value = std::isinf(b.r) ? acc : std::pow(acc, 1.0 / b.r);
  return out;
}

double besov_norm(const RadialProfile& p, const BesovParams& b, const DyadicPartition& part, const NormOptions& opt) {
  return besov_blocks(p, b, part, opt).value;
}

double sobolev_norm(const RadialProfile& p, double s, double exponent, const NormOptions& opt) {
  if (s == 0.0 || p.is_zero()) return profile_norm(p, exponent, opt);
  const auto& g = p.grid();
  if (s < 0.0) {
    for (int m = 0; m <= g.m_max(); ++m)
      for (size_t k = 0; k < g.size(); ++k)
        if (g.panel_of(k) == 0 && p(m, k) != 0.0)
          throw DomainError("sobolev: profile reaches the innermost lambda panel, negative power unbounded");
  }
  const int d = g.d();
  auto lifted = multiplier(p, [&](int m, double lam) { return cplx(std::pow(eigenvalue(m, lam, d), 0.5 * s)); });
  return profile_norm(lifted, exponent, opt);
}

// ---------------------------------------------------------------------------
// Localized functions

Shape ring_bump(const Ring& ring, double at, double width) {
  if (!(ring.r1 > 0.0) || !(ring.r2 > ring.r1)) throw DomainError("ring: need 0 < r1 < r2");
  const double lo = 0.5 * std::log(ring.r1), hi = 0.5 * std::log(ring.r2), len = hi - lo;
  const double c = lo + at * len, h = 0.5 * width * len;
  if (!(at > 0.0 && at < 1.0) || !(width > 0.0) || c - h < lo - 1e-14 || c + h > hi + 1e-14)
    throw DomainError("ring bump: placement leaves the ring");
  return [c, h](double tau) {
    if (!(tau > 0.0)) return cplx(0.0);
    const double u = (std::log(tau) - c) / h;
    return std::abs(u) < 1.0 ? cplx(std::exp(1.0 - 1.0 / (1.0 - u * u))) : cplx(0.0);
  };
}

RadialProfile make_localized(const GridPtr& grid, int j, const Ring& ring, const Shape& shape,
                             const std::vector<cplx>& mode_weights) {
  if (!(ring.r1 > 0.0) || !(ring.r2 > ring.r1)) throw DomainError("make_localized: need 0 < r1 < r2");
  const auto& g = *grid;
  const int d = g.d();
  if (mode_weights.size() > static_cast<size_t>(g.m_max() + 1))
    throw DomainError("make_localized: more mode weights than grid modes");
  const double a = std::sqrt(ring.r1), b = std::sqrt(ring.r2);
  for (int i = 0; i < 4000; ++i) {
    const double below = log_node(a / 16.0, a, i, 4000) * (1.0 - 1e-12);
    const double above = log_node(b, 16.0 * b, i, 4000) * (1.0 + 1e-12);
    if (shape(below) != 0.0 || shape(above) != 0.0)
      throw DomainError("make_localized: shape support violates the ring");
  }
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(g.m_max() + 1, g.size());
  const int modes = mode_weights.empty() ? g.m_max() + 1 : static_cast<int>(mode_weights.size());
  const double lam_lo = g.lambda(g.size() / 2), lam_hi = g.lambda(g.size() - 1);
  for (int m = 0; m < modes; ++m) {
    const cplx w = mode_weights.empty() ? cplx(1.0) : mode_weights[m];
    if (w == 0.0) continue;
    const double scale = std::ldexp(1.0, 2 * j) / (2.0 * m + d);
    if (a * scale < lam_lo * (1.0 - 1e-12) || b * scale > lam_hi * (1.0 + 1e-12))
      throw DomainError("make_localized: ring at j=" + std::to_string(j) + ", m=" + std::to_string(m) +
                        " leaves the spectral grid");
    for (size_t k = 0; k < g.size(); ++k) {
      const double tau = spectrum_tau(m, g.lambda(k), d, j);
      if (tau < a * (1.0 - 1e-12) || tau > b * (1.0 + 1e-12)) continue;
      v(m, k) = w * shape(tau);
    }
  }
  return RadialProfile(grid, std::move(v));
}

std::vector<LocalizedSpec> ring_family(const Ring& ring, int count, int modes, unsigned long long seed) {
  if (count < 1 || modes < 1) throw DomainError("ring_family: count and modes must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<LocalizedSpec> out;
  for (int i = 0; i < count; ++i) {
    LocalizedSpec spec;
    const double at = 0.35 + 0.3 * unit(rng);
    const double width = 0.5 + 0.2 * unit(rng);
    spec.shape = ring_bump(ring, at, width);
    for (int m = 0; m < modes; ++m) {
      const double re = 2.0 * unit(rng) - 1.0, im = 2.0 * unit(rng) - 1.0;
      spec.mode_weights.emplace_back(m == 0 ? 1.0 + std::abs(re) : re, im);
    }
    out.push_back(std::move(spec));
  }
  return out;
}

VerificationReport bernstein_check(const GridPtr& grid, double rho, double exponent,
                                   const std::vector<LocalizedSpec>& family, const BernsteinOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.name = "bernstein";
  rep.params = {{"rho", rho}, {"p", json_number(exponent)}, {"r1", opt.ring.r1}, {"r2", opt.ring.r2}, {"family", family.size()}};
  rep.tol = opt.slack;
  const int d = grid->d();
  std::vector<double> lo, hi;
  for (int j : opt.j_set) {
    double l = std::numeric_limits<double>::infinity(), h = 0.0;
    for (const auto& spec : family) {
      auto u = make_localized(grid, j, opt.ring, spec.shape, spec.mode_weights);
      auto lifted = multiplier(u, [&](int m, double lam) { return cplx(std::pow(eigenvalue(m, lam, d), 0.5 * rho)); });
      const double ratio = profile_norm(lifted, exponent, opt.norm) /
                           (std::pow(2.0, j * rho) * profile_norm(u, exponent, opt.norm));
      l = std::min(l, ratio);
      h = std::max(h, ratio);
    }
    lo.push_back(l);
    hi.push_back(h);
    rep.add("ratio_min_j" + std::to_string(j), l);
    rep.add("ratio_max_j" + std::to_string(j), h);
  }
  auto spread = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) / *std::min_element(v.begin(), v.end());
  };
  rep.measured = std::max(spread(lo), spread(hi));
  rep.fitted_c = *std::min_element(lo.begin(), lo.end());
  rep.fitted_C = *std::max_element(hi.begin(), hi.end());
  rep.pass = rep.all_finite() && rep.measured <= rep.tol;
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace heisen
