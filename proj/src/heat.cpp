#include "heisen/heat.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "heisen/csv.hpp"
#include "heisen/error.hpp"
#include "heisen/laguerre.hpp"

namespace heisen {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Gamma(n, x) for integer n >= 1.
double upper_gamma_int(int n, double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < n; ++k) {
    term *= x / k;
    sum += term;
  }
  return factorial(n - 1) * std::exp(-x) * sum;
}

// Partial sums of the m-series at m_max / 4, m_max / 2 and m_max.
std::array<double, 3> series_partials(int d, double r, double s, int m_max) {
  const double b = 2.0 * r * r;
  std::array<double, 3> out{};
  double acc = 0.0;
  for (int m = 0; m <= m_max; ++m) {
    const cplx a(4.0 * (2 * m + d) + r * r, s);
    cplx term;
    if (m == 0) {
      term = factorial(d) / std::pow(a, d + 1);
    } else {
      // Gamma(m+d)/m! ((a-b)/a)^{m-1} (d a - (m+d) b) / a^{d+2}
      double g = 1.0;
      for (int k = 1; k < d; ++k) g *= m + k;
      const cplx logs = static_cast<double>(m - 1) * std::log(1.0 - b / a) - static_cast<double>(d + 2) * std::log(a);
      term = g * std::exp(logs) * (static_cast<double>(d) * a - static_cast<double>(m + d) * b);
    }
    acc += 2.0 * term.real();
    if (m == m_max / 4) out[0] = acc;
    if (m == m_max / 2) out[1] = acc;
  }
  out[2] = acc;
  return out;
}

double cubic_weight(const double* nodes, int k, double x) {
  double w = 1.0;
  for (int i = 0; i < 4; ++i)
    if (i != k) w *= (x - nodes[i]) / (nodes[k] - nodes[i]);
  return w;
}

// Stencil start and node positions for 4-point interpolation on i*step,
// reflecting across 0 for even functions.
int stencil(double x, double step, int n, double* nodes, int* idx) {
  int c = static_cast<int>(std::floor(x / step));
  c = std::clamp(c, 0, n - 2);
  int start = c - 1;
  if (start + 3 > n - 1) start = n - 4;
  for (int i = 0; i < 4; ++i) {
    const int j = start + i;
    nodes[i] = j * step;
    idx[i] = std::abs(j);
  }
  return start;
}

std::string layout_tag(const KernelLayout& l) {
  std::ostringstream os;
  os << "r" << format_double(l.r_max) << "_s" << format_double(l.s_max) << "_h" << format_double(l.step);
  return os.str();
}

}  // namespace

RadialProfile heat_apply(const RadialProfile& p, double t) {
  if (!(t > 0.0)) throw DomainError("heat_apply: t must be positive");
  const int d = p.grid().d();
  return multiplier(p, [&](int m, double lam) { return cplx(std::exp(-t * eigenvalue(m, lam, d))); });
}

double tail_bound(int m_max, double lambda_max, double lambda_min, double t, int d) {
  if (!(t > 0.0)) throw DomainError("tail_bound: t must be positive");
  if (d < 1 || m_max < 0) throw DomainError("tail_bound: bad d or m_max");
  const double K = plancherel_constant(d);
  const double C = laguerre_bound_constant(d - 1);
  // m > m_max: (m+1)^{d-1} / (2m+d)^{d+1} <= (2m+d)^{-2}
  double bound = K * C * 2.0 * factorial(d) / std::pow(4.0 * t, d + 1) / (2.0 * (2.0 * m_max + d));
  if (std::isfinite(lambda_max)) {
    for (int m = 0; m <= m_max; ++m) {
      const double a = 4.0 * t * (2 * m + d);
      const double term = 2.0 * std::pow(m + 1.0, d - 1) * upper_gamma_int(d + 1, a * lambda_max) / std::pow(a, d + 1);
      bound += K * C * term;
      if (term < 1e-300) break;
    }
  }
  if (lambda_min > 0.0) {
    bound += K * C * 2.0 * factorial(d - 1) * lambda_min * std::pow(1.0 + 8.0 * lambda_min * t, d) /
             std::pow(8.0 * t, d);
  }
  return bound;
}

int kernel_truncation(int d, const KernelSeriesOptions& opt) {
  if (!(opt.tol > 0.0)) throw DomainError("kernel: tol must be positive");
  for (int m = 16; m <= opt.m_cap; m *= 2)
    if (tail_bound(m, std::numeric_limits<double>::infinity(), 0.0, 1.0, d) <= opt.tol) return m;
  throw ToleranceError("kernel: tol " + format_double(opt.tol) + " needs more than " + std::to_string(opt.m_cap) +
                       " modes");
}

double heat_kernel_value(int d, double r, double s, int m_max) {
  if (m_max < 16) throw DomainError("heat_kernel_value: m_max must be >= 16");
  const auto p = series_partials(d, r, s, m_max);
  // S_M = S + A/M + B/M^2 + ...
  const double r1 = 2.0 * p[1] - p[0], r2 = 2.0 * p[2] - p[1];
  return plancherel_constant(d) * (4.0 * r2 - r1) / 3.0;
}

std::vector<double> kernel_eval(int d, const std::vector<std::pair<double, double>>& points, double t,
                                const KernelSeriesOptions& opt) {
  if (!(t > 0.0)) throw DomainError("kernel_eval: t must be positive");
  const int m = kernel_truncation(d, opt);
  std::vector<double> out(points.size());
  const double scale = std::pow(t, -(d + 1));
  const double rt = std::sqrt(t);
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < points.size(); ++i)
    out[i] = scale * heat_kernel_value(d, points[i].first / rt, points[i].second / t, m);
  return out;
}

// ---------------------------------------------------------------------------
// KernelTable

double KernelTable::peak() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }

double KernelTable::edge_ratio() const {
  const double p = peak();
  if (p == 0.0) return 0.0;
  const double e = std::max(values.row(values.rows() - 1).cwiseAbs().maxCoeff(),
                            values.col(values.cols() - 1).cwiseAbs().maxCoeff());
  return e / p;
}

bool KernelTable::contains(double r, double s) const {
  return r >= 0.0 && r <= layout.r_max * (1.0 + 1e-12) && std::abs(s) <= layout.s_max * (1.0 + 1e-12);
}

double KernelTable::at(double r, double s) const {
  if (!contains(r, s))
    throw DomainError("kernel table: (" + format_double(r) + ", " + format_double(s) + ") outside the table");
  s = std::abs(s);
  double rn[4], sn[4];
  int ri[4], si[4];
  stencil(std::min(r, layout.r_max), layout.step, static_cast<int>(values.rows()), rn, ri);
  stencil(std::min(s, layout.s_max), layout.step, static_cast<int>(values.cols()), sn, si);
  bool positive = true;
  for (int a = 0; a < 4 && positive; ++a)
    for (int b = 0; b < 4; ++b)
      if (!(values(ri[a], si[b]) > 0.0)) {
        positive = false;
        break;
      }
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    const double wr = cubic_weight(rn, a, r);
    for (int b = 0; b < 4; ++b) {
      const double v = values(ri[a], si[b]);
      acc += wr * cubic_weight(sn, b, s) * (positive ? std::log(v) : v);
    }
  }
  return positive ? std::exp(acc) : acc;
}

KernelTable build_kernel_table(int d, const KernelLayout& layout, const KernelSeriesOptions& opt) {
  if (!(layout.step > 0.0) || !(layout.r_max >= 4 * layout.step) || !(layout.s_max >= 4 * layout.step))
    throw DomainError("kernel table: layout needs at least four nodes per axis");
  KernelTable t;
  t.d = d;
  t.layout = layout;
  t.m_max = kernel_truncation(d, opt);
  t.lambda_max = std::numeric_limits<double>::infinity();
  t.tol = opt.tol;
  t.tail = tail_bound(t.m_max, t.lambda_max, 0.0, 1.0, d);
  const int nr = static_cast<int>(std::lround(layout.r_max / layout.step)) + 1;
  const int ns = static_cast<int>(std::lround(layout.s_max / layout.step)) + 1;
  t.values.resize(nr, ns);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < nr; ++i)
    for (int l = 0; l < ns; ++l) t.values(i, l) = heat_kernel_value(d, t.r_node(i), t.s_node(l), t.m_max);
  return t;
}

void write_kernel_csv(std::ostream& os, const KernelTable& t) {
  os << "# heatkernel v1 d=" << t.d << " mmax=" << t.m_max << " lambda_max=" << format_double(t.lambda_max)
     << " tol=" << format_double(t.tol) << "\n";
  for (Eigen::Index i = 0; i < t.values.rows(); ++i)
    for (Eigen::Index l = 0; l < t.values.cols(); ++l)
      os << format_double(t.r_node(static_cast<int>(i))) << ',' << format_double(t.s_node(static_cast<int>(l))) << ','
         << format_double(t.values(i, l)) << "\n";
}

KernelTable read_kernel_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("kernel csv: empty input");
  std::map<std::string, std::string> kv;
  if (!parse_header(line, "# heatkernel v1", kv)) throw DomainError("kernel csv: missing '# heatkernel v1' header");
  for (const char* key : {"d", "mmax", "lambda_max", "tol"})
    if (!kv.count(key)) throw DomainError(std::string("kernel csv: header lacks ") + key);
  KernelTable t;
  t.d = static_cast<int>(parse_int(kv["d"]));
  t.m_max = static_cast<int>(parse_int(kv["mmax"]));
  t.lambda_max = parse_double(kv["lambda_max"]);
  t.tol = parse_double(kv["tol"]);
  std::vector<std::array<double, 3>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != 3) throw DomainError("kernel csv: expected r,s,value rows");
    rows.push_back({parse_double(f[0]), parse_double(f[1]), parse_double(f[2])});
  }
  if (rows.size() < 16) throw DomainError("kernel csv: too few rows");
  int ns = 0;
  while (ns < static_cast<int>(rows.size()) && rows[ns][0] == rows[0][0]) ++ns;
  if (rows.size() % ns != 0) throw DomainError("kernel csv: rows do not form a lattice");
  const int nr = static_cast<int>(rows.size() / ns);
  const double step = rows[1][1] - rows[0][1];
  t.layout = {rows.back()[0], rows.back()[1], step};
  t.values.resize(nr, ns);
  for (int i = 0; i < nr; ++i)
    for (int l = 0; l < ns; ++l) {
      const auto& row = rows[static_cast<size_t>(i) * ns + l];
      if (std::abs(row[0] - i * step) > 1e-9 * (1 + t.layout.r_max) || std::abs(row[1] - l * step) > 1e-9 * (1 + t.layout.s_max))
        throw DomainError("kernel csv: rows do not form a uniform lattice");
      t.values(i, l) = row[2];
    }
  t.tail = tail_bound(t.m_max, t.lambda_max, 0.0, 1.0, t.d);
  return t;
}

std::string kernel_cache_path(const std::string& cache_dir, int d, const KernelLayout& layout, double tol) {
  std::filesystem::path p(cache_dir);
  p /= "heatkernel_d" + std::to_string(d) + "_tol" + format_double(tol) + "_" + layout_tag(layout) + ".csv";
  return p.string();
}

KernelTable load_kernel_table(int d, const KernelLayout& layout, const KernelSeriesOptions& opt,
                              const std::string& cache_dir) {
  if (cache_dir.empty()) return build_kernel_table(d, layout, opt);
  const auto path = kernel_cache_path(cache_dir, d, layout, opt.tol);
  const int m_max = kernel_truncation(d, opt);
  if (std::ifstream in(path); in) {
    try {
      auto t = read_kernel_csv(in);
      const bool same_layout = std::abs(t.layout.step - layout.step) <= 1e-12 * layout.step &&
                               std::abs(t.layout.r_max - layout.r_max) <= 1e-9 &&
                               std::abs(t.layout.s_max - layout.s_max) <= 1e-9;
      if (t.d == d && t.m_max == m_max && std::isinf(t.lambda_max) && t.tol == opt.tol && same_layout) {
        t.layout = layout;
        return t;
      }
    } catch (const DomainError&) {
      // stale or damaged cache entries are rebuilt
    }
  }
  auto t = build_kernel_table(d, layout, opt);
  std::filesystem::create_directories(cache_dir);
  std::ostringstream os;
  write_kernel_csv(os, t);
  atomic_write(path, os.str());
  return t;
}

double kernel_scaled(double t, double r, double s, const KernelTable& table) {
  if (!(t > 0.0)) throw DomainError("kernel_scaled: t must be positive");
  return std::pow(t, -(table.d + 1)) * table.at(r / std::sqrt(t), s / t);
}

double kernel_scaled(double t, const GroupPoint& w, const KernelTable& table) {
  if (static_cast<int>(w.z.size()) != table.d) throw DomainError("kernel_scaled: dimension mismatch");
  return kernel_scaled(t, std::sqrt(z_norm2(w)), w.s, table);
}

SampledField sample_heat_kernel(const GridSpec& g, double t, const KernelTable& table, int sub_xy, int sub_s) {
  if (table.d != 1) throw DomainError("sample_heat_kernel: d = 1 only");
  if (sub_xy < 1 || sub_s < 1) throw DomainError("sample_heat_kernel: sub-sampling must be positive");
  if (!(table.edge_ratio() <= 1e-4)) throw DomainError("sample_heat_kernel: table edge not negligible");
  const double hx = g.lx / (g.nx - 1), hy = g.ly / (g.ny - 1), hs = g.ls / g.ns;
  const double rt = std::sqrt(t);
  SampledField out(g);
#pragma omp parallel for collapse(2) schedule(dynamic)
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.ns; ++k) {
        double acc = 0.0;
        for (int a = 0; a < sub_xy; ++a)
          for (int b = 0; b < sub_xy; ++b) {
            const double x = g.x(i) + hx * ((a + 0.5) / sub_xy - 0.5);
            const double y = g.y(j) + hy * ((b + 0.5) / sub_xy - 0.5);
            const double r = std::hypot(x, y) / rt;
            if (r > table.layout.r_max) continue;
            for (int c = 0; c < sub_s; ++c) {
              const double s = (g.s(k) + hs * ((c + 0.5) / sub_s - 0.5)) / t;
              if (std::abs(s) > table.layout.s_max) continue;
              acc += table.at(r, s);
            }
          }
        out.at(i, j, k) = std::pow(t, -2.0) * acc / (sub_xy * sub_xy * sub_s);
      }
  return out;
}

double fd_max_step(const GridSpec& g) {
  const double hx = g.lx / (g.nx - 1), hy = g.ly / (g.ny - 1), hs = g.ls / g.ns;
  double norm = 0.0;
  for (int i = 1; i + 1 < g.nx; ++i)
    for (int j = 1; j + 1 < g.ny; ++j) {
      const double x = g.x(i), y = g.y(j);
      const double row = 4.0 / (hx * hx) + 4.0 / (hy * hy) + 16.0 * (x * x + y * y) / (hs * hs) +
                         4.0 * std::abs(y) / (hx * hs) + 4.0 * std::abs(x) / (hy * hs);
      norm = std::max(norm, row);
    }
  return 1.0 / norm;
}

SampledField fd_heat_oracle(const SampledField& u0, double t, int steps) {
  const auto& g = u0.grid;
  if (!(t > 0.0) || steps < 1) throw DomainError("fd_heat_oracle: need t > 0 and steps >= 1");
  const double dt = t / steps;
  if (dt > fd_max_step(g))
    throw DomainError("fd_heat_oracle: step " + format_double(dt) + " exceeds the stability limit " +
                      format_double(fd_max_step(g)));
  SampledField u = u0;
  for (int n = 0; n < steps; ++n) {
    auto lu = sublaplacian_fd(u);
    for (int i = 1; i + 1 < g.nx; ++i)
      for (int j = 1; j + 1 < g.ny; ++j) {
        const size_t b = g.index(i, j, 0);
        for (int k = 0; k < g.ns; ++k) u.values[b + k] += dt * lu.values[b + k];
      }
  }
  return u;
}

}  // namespace heisen
