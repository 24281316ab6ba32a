#include "heisen/spectral.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "heisen/csv.hpp"
#include "heisen/error.hpp"
#include "heisen/laguerre.hpp"
#include "heisen/quadrature.hpp"

namespace heisen {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::vector<Eigen::Index> nonzero_columns(const Eigen::MatrixXcd& v) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index c = 0; c < v.cols(); ++c)
    if (v.col(c).cwiseAbs().maxCoeff() > 0.0) cols.push_back(c);
  return cols;
}

// Phase matrix B(c, l) = K w_c |lambda_c|^d e^{-i lambda_c s_l}.
Eigen::MatrixXcd synthesis_phase(const SpectralGrid& g, const std::vector<Eigen::Index>& cols,
                                 const std::vector<double>& s) {
  const double K = plancherel_constant(g.d());
  Eigen::MatrixXcd B(cols.size(), s.size());
  for (size_t c = 0; c < cols.size(); ++c) {
    const double lam = g.lambda(cols[c]);
    const double w = K * g.weight(cols[c]) * std::pow(std::abs(lam), g.d());
    for (size_t l = 0; l < s.size(); ++l) B(c, l) = w * std::polar(1.0, -lam * s[l]);
  }
  return B;
}

}  // namespace

double plancherel_constant(int d) { return std::pow(2.0, d - 1) / std::pow(kPi, d + 1); }

double sphere_measure(int d) { return 2.0 * std::pow(kPi, d) / factorial(d - 1); }

// ---------------------------------------------------------------------------
// SpectralGrid

SpectralGrid::SpectralGrid(const SpectralGridParams& p) : params_(p) {
  if (p.d < 1) throw DomainError("spectral grid: d must be >= 1");
  if (p.m_max < 0 || p.m_max > 512) throw DomainError("spectral grid: m_max must be in [0, 512]");
  if (!(p.lambda_min > 0.0) || !(p.lambda_max > p.lambda_min))
    throw DomainError("spectral grid: need 0 < lambda_min < lambda_max");
  if (p.order < 2 || p.order > 64) throw DomainError("spectral grid: panel order must be in [2, 64]");
  const double ratio = std::log2(p.lambda_max / p.lambda_min);
  panels_ = static_cast<int>(std::lround(ratio));
  if (std::abs(ratio - panels_) > 1e-9 || panels_ < 1)
    throw DomainError("spectral grid: lambda_max / lambda_min must be a power of two");
  const auto& ref = gauss_legendre(p.order);
  const size_t half = static_cast<size_t>(panels_) * p.order;
  lambda_.assign(2 * half, 0.0);
  weight_.assign(2 * half, 0.0);
  for (int pn = 0; pn < panels_; ++pn) {
    const double lo = std::ldexp(p.lambda_min, pn);
    for (int q = 0; q < p.order; ++q) {
      const double lam = lo * 0.5 * (3.0 + ref.nodes[q]);
      const double w = lo * 0.5 * ref.weights[q];
      lambda_[index(+1, pn, q)] = lam;
      weight_[index(+1, pn, q)] = w;
      lambda_[index(-1, pn, q)] = -lam;
      weight_[index(-1, pn, q)] = w;
    }
  }
  diff_ = lagrange_derivative_matrix(ref.nodes);
}

size_t SpectralGrid::index(int sign, int panel, int slot) const {
  const size_t half = size() / 2;
  const size_t j = static_cast<size_t>(panel) * params_.order + slot;
  return sign > 0 ? half + j : half - 1 - j;
}

int SpectralGrid::panel_of(size_t k) const {
  const size_t half = size() / 2;
  const size_t j = k >= half ? k - half : half - 1 - k;
  return static_cast<int>(j / params_.order);
}

int SpectralGrid::slot_of(size_t k) const {
  const size_t half = size() / 2;
  const size_t j = k >= half ? k - half : half - 1 - k;
  return static_cast<int>(j % params_.order);
}

std::optional<size_t> SpectralGrid::shifted(size_t k, int panel_shift) const {
  const int p = panel_of(k) + panel_shift;
  if (p < 0 || p >= panels_) return std::nullopt;
  return index(lambda_[k] > 0 ? +1 : -1, p, slot_of(k));
}

std::pair<double, double> SpectralGrid::panel_bounds(size_t k) const {
  const double lo = std::ldexp(params_.lambda_min, panel_of(k));
  return {lo, 2.0 * lo};
}

bool SpectralGrid::same_as(const SpectralGrid& o) const {
  return params_.d == o.params_.d && params_.m_max == o.params_.m_max &&
         params_.lambda_min == o.params_.lambda_min && params_.lambda_max == o.params_.lambda_max &&
         params_.order == o.params_.order;
}

// ---------------------------------------------------------------------------
// RadialProfile

RadialProfile::RadialProfile(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw DomainError("profile: null grid");
  values_ = Eigen::MatrixXcd::Zero(grid_->m_max() + 1, grid_->size());
}

RadialProfile::RadialProfile(GridPtr grid, Eigen::MatrixXcd values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw DomainError("profile: null grid");
  if (values_.rows() != grid_->m_max() + 1 || values_.cols() != static_cast<Eigen::Index>(grid_->size()))
    throw DomainError("profile: value matrix does not match the grid");
  if (!values_.allFinite()) throw DomainError("profile: non-finite entries");
}

bool RadialProfile::is_zero() const { return values_.size() == 0 || values_.cwiseAbs().maxCoeff() == 0.0; }

int RadialProfile::top_mode() const {
  for (Eigen::Index m = values_.rows() - 1; m >= 0; --m)
    if (values_.row(m).cwiseAbs().maxCoeff() > 0.0) return static_cast<int>(m);
  return -1;
}

std::pair<double, double> RadialProfile::lambda_range() const {
  double lo = INFINITY, hi = 0.0;
  for (Eigen::Index c = 0; c < values_.cols(); ++c)
    if (values_.col(c).cwiseAbs().maxCoeff() > 0.0) {
      const double a = std::abs(grid_->lambda(c));
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
  if (hi == 0.0) return {0.0, 0.0};
  return {lo, hi};
}

std::pair<double, double> RadialProfile::spectrum_range() const {
  double lo = INFINITY, hi = 0.0;
  for (Eigen::Index c = 0; c < values_.cols(); ++c)
    for (Eigen::Index m = 0; m < values_.rows(); ++m)
      if (values_(m, c) != 0.0) {
        const double mu = eigenvalue(static_cast<int>(m), grid_->lambda(c), grid_->d());
        lo = std::min(lo, mu);
        hi = std::max(hi, mu);
      }
  if (hi == 0.0) return {0.0, 0.0};
  return {lo, hi};
}

namespace {
void require_same_grid(const RadialProfile& a, const RadialProfile& b) {
  if (!a.grid().same_as(b.grid())) throw DomainError("profile arithmetic: grid mismatch");
}
}  // namespace

RadialProfile operator+(const RadialProfile& a, const RadialProfile& b) {
  require_same_grid(a, b);
  return RadialProfile(a.grid_ptr(), a.values() + b.values());
}

RadialProfile operator-(const RadialProfile& a, const RadialProfile& b) {
  require_same_grid(a, b);
  return RadialProfile(a.grid_ptr(), a.values() - b.values());
}

RadialProfile operator*(cplx c, const RadialProfile& a) { return RadialProfile(a.grid_ptr(), c * a.values()); }

// ---------------------------------------------------------------------------
// Quadrature

double RadialQuadrature::band() const { return kPi / s_step(); }

double RadialQuadrature::resolved_spectrum() const {
  if (r_panel <= 0.0) return 0.0;
  // three wavelengths of the Laguerre function per Gauss panel
  const double k = 6.0 * kPi / r_panel;
  return k * k;
}

RadialQuadrature make_quadrature(int d, double r_max, int r_panels, int r_order, double s_half, int n_s) {
  if (d < 1 || !(r_max > 0.0) || r_panels < 1 || !(s_half > 0.0) || n_s < 3)
    throw DomainError("make_quadrature: invalid parameters");
  RadialQuadrature q;
  q.d = d;
  auto rule = composite_gauss(0.0, r_max, r_panels, r_order);
  q.r = rule.nodes;
  q.r_weight.resize(q.r.size());
  const double omega = sphere_measure(d);
  for (size_t i = 0; i < q.r.size(); ++i) q.r_weight[i] = rule.weights[i] * omega * std::pow(q.r[i], 2 * d - 1);
  q.r_panel = r_max / r_panels;
  q.s.resize(n_s);
  q.s_weight.assign(n_s, 0.0);
  const double h = 2.0 * s_half / (n_s - 1);
  for (int l = 0; l < n_s; ++l) {
    q.s[l] = -s_half + l * h;
    q.s_weight[l] = (l == 0 || l == n_s - 1) ? 0.5 * h : h;
  }
  return q;
}

RadialQuadrature quadrature_for(const RadialProfile& p, const QuadratureHints& hints) {
  const int d = p.grid().d();
  if (p.is_zero()) return make_quadrature(d, 1.0, 1, hints.r_order, 1.0, 3);
  const auto [lo, hi] = p.lambda_range();
  const int m_hi = p.top_mode();
  const double y_max = 4.0 * m_hi + 2.0 * d + 2.0 * hints.r_efolds;
  const double r_max = std::sqrt(y_max / (2.0 * lo));
  const double mu_max = eigenvalue(m_hi, hi, d);
  const double waves = 2.0 * std::sqrt(mu_max) * r_max / (2.0 * kPi);
  const int panels = std::max(hints.min_r_panels, static_cast<int>(std::ceil(waves / hints.waves_per_panel)));
  const double s_half = hints.s_extent / lo;
  const double ds_target = 2.0 * kPi / (hi * hints.s_nodes_per_period);
  const int half_nodes = static_cast<int>(std::ceil(s_half / ds_target));
  return make_quadrature(d, r_max, panels, hints.r_order, s_half, 2 * half_nodes + 1);
}

RadialFunction RadialFunction::sample(const RadialQuadrature& q, const std::function<cplx(double, double)>& f) {
  RadialFunction out;
  out.quad = q;
  out.values.resize(q.r.size(), q.s.size());
  for (size_t i = 0; i < q.r.size(); ++i)
    for (size_t l = 0; l < q.s.size(); ++l) out.values(i, l) = f(q.r[i], q.s[l]);
  return out;
}

double RadialFunction::boundary_ratio() const {
  const double peak = values.cwiseAbs().maxCoeff();
  if (peak == 0.0) return 0.0;
  double edge = values.row(values.rows() - 1).cwiseAbs().maxCoeff();
  edge = std::max(edge, values.col(0).cwiseAbs().maxCoeff());
  edge = std::max(edge, values.col(values.cols() - 1).cwiseAbs().maxCoeff());
  return edge / peak;
}

// ---------------------------------------------------------------------------
// Transforms

RadialProfile forward_transform(const RadialFunction& f, const GridPtr& grid, const ForwardOptions& opt) {
  if (!grid) throw DomainError("forward_transform: null grid");
  const auto& q = f.quad;
  const auto& g = *grid;
  if (q.d != g.d()) throw DomainError("forward_transform: dimension mismatch");
  RadialProfile zero(grid);
  if (f.values.size() == 0 || f.values.cwiseAbs().maxCoeff() == 0.0) return zero;
  const double edge = f.boundary_ratio();
  if (edge > opt.decay_floor)
    throw DomainError("forward_transform: non-decaying f at grid boundary (edge/peak = " + format_double(edge) + ")");

  const double band = q.band();
  const int m_eval = opt.m_eval >= 0 ? std::min(opt.m_eval, g.m_max()) : g.m_max();
  const double lam_eval = opt.lambda_eval > 0.0 ? std::min(opt.lambda_eval, band) : band;

  std::vector<Eigen::Index> cols;  // |lambda| < band
  for (size_t k = 0; k < g.size(); ++k)
    if (std::abs(g.lambda(k)) < band) cols.push_back(static_cast<Eigen::Index>(k));
  if (cols.empty()) return zero;

  const Eigen::Index ns = static_cast<Eigen::Index>(q.s.size());
  Eigen::MatrixXcd E(ns, cols.size());
  for (size_t c = 0; c < cols.size(); ++c) {
    const double lam = g.lambda(cols[c]);
    for (Eigen::Index l = 0; l < ns; ++l) E(l, c) = q.s_weight[l] * std::polar(1.0, lam * q.s[l]);
  }
  Eigen::MatrixXcd G = f.values * E;

  // content near the s band edge means the s grid aliases
  std::vector<double> gnorm(cols.size(), 0.0);
  double gpeak = 0.0;
  for (size_t c = 0; c < cols.size(); ++c) {
    for (Eigen::Index i = 0; i < G.rows(); ++i) gnorm[c] += q.r_weight[i] * std::abs(G(i, c));
    gpeak = std::max(gpeak, gnorm[c]);
  }
  double near_edge = 0.0;
  for (size_t c = 0; c < cols.size(); ++c)
    if (std::abs(g.lambda(cols[c])) > 0.5 * band) near_edge = std::max(near_edge, gnorm[c]);
  if (gpeak > 0.0 && near_edge > opt.decay_floor * gpeak)
    throw DomainError("forward_transform: non-decaying s-spectrum at the sampling band (" +
                      format_double(near_edge / gpeak) + "); refine s");

  std::vector<Eigen::Index> eval;
  std::vector<size_t> eval_pos;
  double lam_top = 0.0;
  for (size_t c = 0; c < cols.size(); ++c)
    if (std::abs(g.lambda(cols[c])) <= lam_eval) {
      eval.push_back(cols[c]);
      eval_pos.push_back(c);
      lam_top = std::max(lam_top, std::abs(g.lambda(cols[c])));
    }
  if (eval.empty()) return zero;
  if (eigenvalue(m_eval, lam_top, g.d()) > q.resolved_spectrum())
    throw DomainError("forward_transform: r quadrature does not resolve m=" + std::to_string(m_eval) +
                      " at |lambda|=" + format_double(lam_top) + "; refine r or lower m_eval");

  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(g.m_max() + 1, g.size());
  const int p = g.d() - 1;
  const std::ptrdiff_t n_eval = static_cast<std::ptrdiff_t>(eval.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t e = 0; e < n_eval; ++e) {
    const Eigen::Index k = eval[e];
    const size_t c = eval_pos[e];
    const double a = std::abs(g.lambda(k));
    std::vector<double> buf(m_eval + 1);
    std::vector<cplx> acc(m_eval + 1, 0.0);
    for (size_t i = 0; i < q.r.size(); ++i) {
      weighted_laguerre_all(p, 2.0 * a * q.r[i] * q.r[i], buf);
      const cplx gi = q.r_weight[i] * G(i, c);
      for (int m = 0; m <= m_eval; ++m) acc[m] += gi * buf[m];
    }
    for (int m = 0; m <= m_eval; ++m) R(m, k) = acc[m] / binomial(m + p, m);
  }
  return RadialProfile(grid, std::move(R));
}

RadialProfile forward_transform_sampled(const SampledField& f, const GridPtr& grid, int m_eval, double lambda_eval) {
  if (!grid) throw DomainError("forward_transform_sampled: null grid");
  const auto& g = *grid;
  if (g.d() != 1) throw DomainError("forward_transform_sampled: sampled fields are d = 1");
  const auto& G = f.grid;
  m_eval = std::min(m_eval, g.m_max());
  const double hmax = std::max(G.hx(), G.hy());
  std::vector<Eigen::Index> cols;
  for (size_t k = 0; k < g.size(); ++k) {
    const double a = std::abs(g.lambda(k));
    if (a <= lambda_eval && a * G.hs() <= 0.5 * kPi) cols.push_back(static_cast<Eigen::Index>(k));
  }
  Eigen::MatrixXcd R = Eigen::MatrixXcd::Zero(g.m_max() + 1, g.size());
  if (cols.empty() || m_eval < 0) return RadialProfile(grid, std::move(R));
  // s transform for every (x, y) column
  const Eigen::Index nxy = static_cast<Eigen::Index>(G.nx) * G.ny;
  Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> V(f.values.data(), nxy, G.ns);
  Eigen::MatrixXcd E(G.ns, cols.size());
  for (size_t c = 0; c < cols.size(); ++c)
    for (int l = 0; l < G.ns; ++l) E(l, c) = G.hs() * std::polar(1.0, g.lambda(cols[c]) * G.s(l));
  Eigen::MatrixXcd S = V * E;
  const std::ptrdiff_t nc = static_cast<std::ptrdiff_t>(cols.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const double a = std::abs(g.lambda(cols[c]));
    std::vector<double> buf(m_eval + 1);
    std::vector<cplx> acc(m_eval + 1, 0.0);
    int m_ok = m_eval;
    // trapezoid in x, y resolves sqrt(mu) h below pi/2
    while (m_ok >= 0 && std::sqrt(eigenvalue(m_ok, a, 1)) * hmax > 0.5 * kPi) --m_ok;
    if (m_ok < 0) continue;
    for (int i = 0; i < G.nx; ++i)
      for (int j = 0; j < G.ny; ++j) {
        const double x = G.x(i), y = G.y(j);
        const double dA = G.cell_volume(i, j) / G.hs();
        weighted_laguerre_all(0, 2.0 * a * (x * x + y * y), std::span<double>(buf.data(), m_ok + 1));
        const cplx v = dA * S(static_cast<Eigen::Index>(i) * G.ny + j, c);
        for (int m = 0; m <= m_ok; ++m) acc[m] += v * buf[m];
      }
    for (int m = 0; m <= m_ok; ++m) R(m, cols[c]) = acc[m];
  }
  return RadialProfile(grid, std::move(R));
}

double mode_tail_fraction(const RadialProfile& p) {
  const auto& g = p.grid();
  const int d = g.d();
  double total = 0.0, top = 0.0;
  for (Eigen::Index m = 0; m <= g.m_max(); ++m) {
    double row = 0.0;
    for (size_t k = 0; k < g.size(); ++k)
      row += g.weight(k) * std::pow(std::abs(g.lambda(k)), d) * std::norm(p(static_cast<int>(m), k));
    row *= binomial(static_cast<int>(m) + d - 1, static_cast<int>(m));
    total += row;
    if (m == g.m_max()) top = row;
  }
  return total > 0.0 ? std::sqrt(top / total) : 0.0;
}

Eigen::MatrixXcd synthesize(const RadialProfile& p, const std::vector<double>& r, const std::vector<double>& s) {
  const auto& g = p.grid();
  auto cols = nonzero_columns(p.values());
  const int m_hi = p.top_mode();
  if (cols.empty()) return Eigen::MatrixXcd::Zero(r.size(), s.size());
  Eigen::MatrixXcd A(r.size(), cols.size());
  const int pord = g.d() - 1;
  const std::ptrdiff_t nc = static_cast<std::ptrdiff_t>(cols.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < nc; ++c) {
    const double a = std::abs(g.lambda(cols[c]));
    std::vector<double> buf(m_hi + 1);
    for (size_t i = 0; i < r.size(); ++i) {
      weighted_laguerre_all(pord, 2.0 * a * r[i] * r[i], buf);
      cplx acc = 0.0;
      for (int m = 0; m <= m_hi; ++m) acc += p(m, cols[c]) * buf[m];
      A(i, c) = acc;
    }
  }
  return A * synthesis_phase(g, cols, s);
}

RadialFunction inverse_transform(const RadialProfile& p, const RadialQuadrature& q, const InverseOptions& opt) {
  if (q.d != p.grid().d()) throw DomainError("inverse_transform: dimension mismatch");
  const double tail = mode_tail_fraction(p);
  if (tail > opt.tail_tolerance)
    throw ToleranceError("inverse_transform: Laguerre tail " + format_double(tail) + " above tolerance " +
                         format_double(opt.tail_tolerance) + "; raise m_max");
  RadialFunction out;
  out.quad = q;
  out.values = synthesize(p, q.r, q.s);
  return out;
}

Synthesizer::Synthesizer(const RadialProfile& pattern, const RadialQuadrature& q)
    : quad_(q), grid_(pattern.grid_ptr()), cols_(nonzero_columns(pattern.values())), m_hi_(pattern.top_mode()) {
  const auto& g = *grid_;
  const size_t nr = q.r.size();
  table_.assign(cols_.size() * nr * (m_hi_ + 1), 0.0);
  for (size_t c = 0; c < cols_.size(); ++c) {
    const double a = std::abs(g.lambda(cols_[c]));
    for (size_t i = 0; i < nr; ++i)
      weighted_laguerre_all(g.d() - 1, 2.0 * a * q.r[i] * q.r[i],
                            std::span<double>(&table_[(c * nr + i) * (m_hi_ + 1)], m_hi_ + 1));
  }
  phase_ = synthesis_phase(g, cols_, q.s);
}

RadialFunction Synthesizer::operator()(const RadialProfile& p) const {
  if (!p.grid().same_as(*grid_)) throw DomainError("synthesizer: grid mismatch");
  if (p.top_mode() > m_hi_) throw DomainError("synthesizer: profile exceeds the pattern's modes");
  const size_t nr = quad_.r.size();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(nr, cols_.size());
  double covered = 0.0;
  for (size_t c = 0; c < cols_.size(); ++c) {
    for (int m = 0; m <= m_hi_; ++m) {
      const cplx v = p(m, cols_[c]);
      if (v == 0.0) continue;
      covered += std::abs(v);
      const double* t = &table_[c * nr * (m_hi_ + 1) + m];
      for (size_t i = 0; i < nr; ++i) A(i, c) += v * t[i * (m_hi_ + 1)];
    }
  }
  if (std::abs(covered - p.values().cwiseAbs().sum()) > 1e-12 * (covered + 1e-300))
    throw DomainError("synthesizer: profile support exceeds the pattern");
  RadialFunction out;
  out.quad = quad_;
  out.values = A * phase_;
  return out;
}

// ---------------------------------------------------------------------------
// Norms and multipliers

double plancherel_norm(const RadialProfile& p) {
  const auto& g = p.grid();
  const int d = g.d();
  double total = 0.0;
  for (int m = 0; m <= g.m_max(); ++m) {
    double row = 0.0;
    for (size_t k = 0; k < g.size(); ++k) {
      const cplx v = p(m, k);
      if (v == 0.0) continue;
      row += g.weight(k) * std::pow(std::abs(g.lambda(k)), d) * std::norm(v);
    }
    total += binomial(m + d - 1, m) * row;
  }
  return std::sqrt(plancherel_constant(d) * total);
}

double sup_bound(const RadialProfile& p) {
  const auto& g = p.grid();
  const int d = g.d();
  double total = 0.0;
  for (int m = 0; m <= g.m_max(); ++m) {
    double row = 0.0;
    for (size_t k = 0; k < g.size(); ++k) {
      const cplx v = p(m, k);
      if (v == 0.0) continue;
      row += g.weight(k) * std::pow(std::abs(g.lambda(k)), d) * std::abs(v);
    }
    total += binomial(m + d - 1, m) * row;
  }
  return plancherel_constant(d) * total;
}

double radial_lp_norm(const RadialFunction& f, double p) {
  if (!(p >= 1.0)) throw DomainError("lp norm: p must be >= 1");
  if (f.values.size() == 0) return 0.0;
  if (std::isinf(p)) return f.values.cwiseAbs().maxCoeff();
  const auto& q = f.quad;
  double total = 0.0;
  for (Eigen::Index i = 0; i < f.values.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index l = 0; l < f.values.cols(); ++l) {
      const double a = std::abs(f.values(i, l));
      if (a == 0.0) continue;
      row += q.s_weight[l] * (p == 2.0 ? a * a : std::pow(a, p));
    }
    total += q.r_weight[i] * row;
  }
  return std::pow(total, 1.0 / p);
}

// Pattern search for max |f| starting at a grid maximum.
double refine_sup(const RadialProfile& p, const RadialFunction& f) {
  Eigen::Index bi = 0, bl = 0;
  double best = f.values.cwiseAbs().maxCoeff(&bi, &bl);
  double r0 = f.quad.r[bi], s0 = f.quad.s[bl];
  double dr = 0.5 * (f.quad.r_panel / 4.0), ds = 0.5 * f.quad.s_step();
  auto eval = [&](double r, double s) {
    return std::abs(synthesize(p, std::vector<double>{std::max(r, 0.0)}, std::vector<double>{s})(0, 0));
  };
  for (int it = 0; it < 60 && (dr > 1e-12 * (1.0 + r0) || ds > 1e-12 * (1.0 + std::abs(s0))); ++it) {
    bool moved = false;
    const double cand[4][2] = {{r0 + dr, s0}, {r0 - dr, s0}, {r0, s0 + ds}, {r0, s0 - ds}};
    for (const auto& c : cand) {
      if (c[0] < 0.0) continue;
      const double v = eval(c[0], c[1]);
      if (v > best) {
        best = v;
        r0 = c[0];
        s0 = c[1];
        moved = true;
      }
    }
    if (!moved) {
      dr *= 0.5;
      ds *= 0.5;
    }
  }
  return best;
}

double profile_lp_norm(const RadialProfile& p, double exponent, const QuadratureHints& hints) {
  if (!(exponent >= 1.0)) throw DomainError("lp norm: p must be >= 1");
  if (p.is_zero()) return 0.0;
  auto q = quadrature_for(p, hints);
  auto f = inverse_transform(p, q);
  if (std::isinf(exponent)) return refine_sup(p, f);
  return radial_lp_norm(f, exponent);
}

RadialFunction split_inverse(const std::vector<RadialProfile>& parts, const RadialQuadrature& q, double s_extent) {
  RadialFunction f;
  f.quad = q;
  f.values = Eigen::MatrixXcd::Zero(q.r.size(), q.s.size());
  for (const auto& part : parts) {
    if (part.is_zero()) continue;
    const double reach = s_extent / part.lambda_range().first;
    size_t l0 = 0, l1 = q.s.size();
    while (l0 < l1 && q.s[l0] < -reach) ++l0;
    while (l1 > l0 && q.s[l1 - 1] > reach) --l1;
    if (l0 == l1) continue;
    const std::vector<double> s(q.s.begin() + l0, q.s.begin() + l1);
    f.values.middleCols(l0, l1 - l0) += synthesize(part, q.r, s);
  }
  return f;
}

double split_lp_norm(const std::vector<RadialProfile>& parts, double exponent, const QuadratureHints& hints) {
  if (!(exponent >= 1.0)) throw DomainError("lp norm: p must be >= 1");
  if (parts.empty()) return 0.0;
  RadialProfile sum = parts.front();
  for (size_t i = 1; i < parts.size(); ++i) sum = sum + parts[i];
  if (sum.is_zero()) return 0.0;
  const auto f = split_inverse(parts, quadrature_for(sum, hints), hints.s_extent);
  return std::isinf(exponent) ? refine_sup(sum, f) : radial_lp_norm(f, exponent);
}

RadialProfile multiplier(const RadialProfile& p, const std::function<cplx(int, double)>& phi) {
  const auto& g = p.grid();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(p.values().rows(), p.values().cols());
  for (int m = 0; m <= g.m_max(); ++m)
    for (size_t k = 0; k < g.size(); ++k) {
      const cplx v = p(m, k);
      if (v == 0.0) continue;
      const cplx f = phi(m, g.lambda(k));
      if (!std::isfinite(f.real()) || !std::isfinite(f.imag()))
        throw DomainError("multiplier: non-finite value at m=" + std::to_string(m) + ", lambda=" +
                          format_double(g.lambda(k)));
      out(m, k) = f * v;
    }
  return RadialProfile(p.grid_ptr(), std::move(out));
}

RadialProfile dilate_profile(const RadialProfile& p, int k) {
  const auto& g = p.grid();
  const double scale = std::ldexp(1.0, -k * homogeneous_dim(g.d()));
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(p.values().rows(), p.values().cols());
  for (size_t c = 0; c < g.size(); ++c) {
    if (p.values().col(c).cwiseAbs().maxCoeff() == 0.0) continue;
    auto target = g.shifted(c, 2 * k);
    if (!target) throw DomainError("dilate_profile: support leaves the spectral grid");
    out.col(*target) = scale * p.values().col(c);
  }
  return RadialProfile(p.grid_ptr(), std::move(out));
}

// ---------------------------------------------------------------------------
// Checks

VerificationReport check_weight_identity(const RadialFunction& f, const GridPtr& grid, int m_check,
                                         const ForwardOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  const auto& g = *grid;
  const int d = g.d();
  m_check = std::min(m_check, g.m_max() - 1);
  VerificationReport rep;
  rep.name = "weight_identity";
  rep.params = {{"d", d}, {"m_check", m_check}};
  rep.tol = 1e-3;

  ForwardOptions fo = opt;
  fo.m_eval = m_check + 1;
  auto P = forward_transform(f, grid, fo);
  RadialFunction wf = f;
  for (Eigen::Index i = 0; i < wf.values.rows(); ++i)
    for (Eigen::Index l = 0; l < wf.values.cols(); ++l)
      wf.values(i, l) *= cplx(-f.quad.r[i] * f.quad.r[i], f.quad.s[l]);
  auto Q = forward_transform(wf, grid, fo);

  const double band = f.quad.band();
  const double lam_hi = std::min(fo.lambda_eval > 0.0 ? fo.lambda_eval : band, band) / 4.0;
  const int order = g.order();
  const auto& D = g.diff_matrix();
  double err = 0.0, scale = 0.0;
  for (size_t k = 0; k < g.size(); ++k) {
    const double lam = g.lambda(k);
    if (std::abs(lam) > lam_hi) continue;
    const auto [a, b] = g.panel_bounds(k);
    const int slot = g.slot_of(k);
    const int pn = g.panel_of(k);
    const int sign = lam > 0 ? 1 : -1;
    for (int m = 0; m <= m_check; ++m) {
      cplx dR = 0.0;
      for (int j = 0; j < order; ++j) dR += D[slot * order + j] * P(m, g.index(sign, pn, j));
      dR *= 2.0 / (b - a) * sign;
      cplx rhs;
      if (lam > 0)
        rhs = m == 0 ? dR : dR - (m / lam) * (P(m, k) - P(m - 1, k));
      else
        rhs = dR - ((m + d) / std::abs(lam)) * (P(m, k) - P(m + 1, k));
      err = std::max(err, std::abs(Q(m, k) - rhs));
      scale = std::max(scale, std::abs(Q(m, k)));
    }
  }
  rep.measured = scale > 0.0 ? err / scale : err;
  rep.add("max_abs_discrepancy", err);
  rep.add("max_abs_lhs", scale);
  rep.pass = rep.all_finite() && rep.measured <= rep.tol;
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

VerificationReport summability(const RadialProfile& p, double rho) {
  auto t0 = std::chrono::steady_clock::now();
  const auto& g = p.grid();
  const int d = g.d();
  VerificationReport rep;
  rep.name = "summability";
  rep.params = {{"d", d}, {"rho", rho}, {"m_max", g.m_max()}};
  double S = 0.0, A0 = 0.0, Arho = 0.0;
  for (int m = 0; m <= g.m_max(); ++m)
    for (size_t k = 0; k < g.size(); ++k) {
      const double a = std::abs(p(m, k));
      A0 = std::max(A0, a);
      Arho = std::max(Arho, std::pow(eigenvalue(m, g.lambda(k), d), rho) * a);
      S += binomial(m + d - 1, m) * g.weight(k) * std::pow(std::abs(g.lambda(k)), d) * a;
    }
  // low frequencies bounded by sup|R|, high ones by sup|mu^rho R| mu^{-rho}
  double B = 0.0, B_exact = 0.0;
  for (int m = 0; m <= g.m_max(); ++m) {
    const double c = binomial(m + d - 1, m);
    for (size_t k = 0; k < g.size(); ++k) {
      const double lam = std::abs(g.lambda(k));
      const double w = g.weight(k) * std::pow(lam, d);
      B += c * w * (lam * (2 * m + d) <= 1.0 ? A0 : Arho * std::pow(eigenvalue(m, lam, d), -rho));
    }
    if (rho > d + 1)
      B_exact += c * 2.0 * std::pow(2.0 * m + d, -(d + 1)) * (A0 / (d + 1) + Arho * std::pow(4.0, -rho) / (rho - d - 1));
  }
  rep.measured = S;
  rep.add("split_bound", B);
  rep.add("split_bound_closed_form", rho > d + 1 ? B_exact : INFINITY);
  rep.add("sup_R", A0);
  rep.add("sup_mu_rho_R", Arho);
  rep.tol = B;
  const bool regime = rho > 0.5 * homogeneous_dim(d);
  if (!regime) rep.notes.push_back("rho <= N/2: only finiteness is checked");
  rep.pass = std::isfinite(S) && (!regime || S <= B * (1.0 + 1e-12));
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

// ---------------------------------------------------------------------------
// CSV

void write_profile_csv(std::ostream& os, const RadialProfile& p) {
  const auto& g = p.grid();
  os << "# profile d=" << g.d() << " mmax=" << g.m_max() << " nodes=" << g.size() << "\n";
  for (int m = 0; m <= g.m_max(); ++m)
    for (size_t k = 0; k < g.size(); ++k) {
      const cplx v = p(m, k);
      os << m << ',' << format_double(g.lambda(k)) << ',' << format_double(g.weight(k)) << ','
         << format_double(v.real()) << ',' << format_double(v.imag()) << "\n";
    }
}

RadialProfile read_profile_csv(std::istream& is) {
  std::string line;
  std::map<std::string, std::string> kv;
  bool found = false;
  while (std::getline(is, line)) {
    if (parse_header(line, "# profile", kv)) {
      found = true;
      break;
    }
    if (line.empty() || line[0] == '#') continue;
    break;
  }
  if (!found) throw DomainError("profile csv: missing '# profile' header");
  int d = 0, mmax = 0;
  long long nodes = 0;
  try {
    d = static_cast<int>(parse_int(kv.at("d")));
    mmax = static_cast<int>(parse_int(kv.at("mmax")));
    nodes = parse_int(kv.at("nodes"));
  } catch (const std::out_of_range&) {
    throw DomainError("profile csv: incomplete header");
  }
  if (nodes <= 0 || nodes % 2 != 0) throw DomainError("profile csv: node count must be even and positive");
  std::vector<double> lam(nodes), w(nodes);
  Eigen::MatrixXcd vals = Eigen::MatrixXcd::Zero(mmax + 1, nodes);
  std::vector<long long> next(mmax + 1, 0);
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split_csv(line);
    if (cols.size() != 5) throw DomainError("profile csv: expected 5 columns");
    const int m = static_cast<int>(parse_int(cols[0]));
    if (m < 0 || m > mmax) throw DomainError("profile csv: mode out of range");
    const long long k = next[m]++;
    if (k >= nodes) throw DomainError("profile csv: too many rows for mode " + std::to_string(m));
    lam[k] = parse_double(cols[1]);
    w[k] = parse_double(cols[2]);
    vals(m, k) = cplx(parse_double(cols[3]), parse_double(cols[4]));
  }
  for (int m = 0; m <= mmax; ++m)
    if (next[m] != nodes) throw DomainError("profile csv: missing rows for mode " + std::to_string(m));
  // recover the panel layout: the first `order` positive weights sum to lambda_min
  const long long half = nodes / 2;
  double total = 0.0;
  for (long long k = half; k < nodes; ++k) total += w[k];
  for (long long order = 2; order <= std::min<long long>(half, 64); ++order) {
    if (half % order != 0) continue;
    double lmin = 0.0;
    for (long long k = half; k < half + order; ++k) lmin += w[k];
    const int panels = static_cast<int>(half / order);
    SpectralGridParams gp{d, mmax, lmin, std::ldexp(lmin, panels), static_cast<int>(order)};
    // snap lambda_min to the nearest power of two when it is one
    const double l2 = std::round(std::log2(lmin));
    if (std::abs(std::ldexp(1.0, static_cast<int>(l2)) - lmin) < 1e-12 * lmin) {
      gp.lambda_min = std::ldexp(1.0, static_cast<int>(l2));
      gp.lambda_max = std::ldexp(gp.lambda_min, panels);
    }
    if (std::abs(gp.lambda_max - gp.lambda_min - total) > 1e-10 * total) continue;
    auto grid = SpectralGrid::make(gp);
    bool ok = true;
    for (long long k = 0; k < nodes && ok; ++k)
      ok = std::abs(grid->lambda(k) - lam[k]) <= 1e-12 * std::abs(lam[k]);
    if (ok) return RadialProfile(grid, std::move(vals));
  }
  throw DomainError("profile csv: nodes are not a dyadic Gauss-Legendre layout");
}

}  // namespace heisen
