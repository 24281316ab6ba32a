#include "heisen/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "heisen/csv.hpp"
#include "heisen/error.hpp"

namespace heisen {

namespace {

constexpr cplx I(0.0, 1.0);

void require_same_grid(const SampledField& a, const SampledField& b, const char* what) {
  if (!(a.grid == b.grid)) throw DomainError(std::string(what) + ": grid mismatch");
}

// First derivative along x (axis 0) or y (axis 1): centered inside,
// second-order one-sided at the two boundary nodes.
std::vector<cplx> diff_xy(const SampledField& f, int axis) {
  const auto& g = f.grid;
  const int n = axis == 0 ? g.nx : g.ny;
  const double h = axis == 0 ? g.hx() : g.hy();
  const size_t stride = axis == 0 ? static_cast<size_t>(g.ny) * g.ns : static_cast<size_t>(g.ns);
  std::vector<cplx> out(g.size());
  const double c = 0.5 / h;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const int a = axis == 0 ? i : j;
      const size_t base = g.index(i, j, 0);
      for (int k = 0; k < g.ns; ++k) {
        const cplx* p = &f.values[base + k];
        cplx v;
        if (a == 0)
          v = c * (-3.0 * p[0] + 4.0 * p[stride] - p[2 * stride]);
        else if (a == n - 1)
          v = c * (3.0 * p[0] - 4.0 * p[-static_cast<std::ptrdiff_t>(stride)] +
                   p[-2 * static_cast<std::ptrdiff_t>(stride)]);
        else
          v = c * (p[stride] - p[-static_cast<std::ptrdiff_t>(stride)]);
        out[base + k] = v;
      }
    }
  return out;
}

std::vector<cplx> diff2_xy(const SampledField& f, int axis) {
  const auto& g = f.grid;
  const int n = axis == 0 ? g.nx : g.ny;
  const double h = axis == 0 ? g.hx() : g.hy();
  const std::ptrdiff_t st = axis == 0 ? static_cast<std::ptrdiff_t>(g.ny) * g.ns : g.ns;
  std::vector<cplx> out(g.size());
  const double c = 1.0 / (h * h);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const int a = axis == 0 ? i : j;
      const size_t base = g.index(i, j, 0);
      for (int k = 0; k < g.ns; ++k) {
        const cplx* p = &f.values[base + k];
        cplx v;
        if (a == 0)
          v = c * (2.0 * p[0] - 5.0 * p[st] + 4.0 * p[2 * st] - p[3 * st]);
        else if (a == n - 1)
          v = c * (2.0 * p[0] - 5.0 * p[-st] + 4.0 * p[-2 * st] - p[-3 * st]);
        else
          v = c * (p[st] - 2.0 * p[0] + p[-st]);
        out[base + k] = v;
      }
    }
  return out;
}

std::vector<cplx> diff_s(const std::vector<cplx>& v, const GridSpec& g) {
  std::vector<cplx> out(v.size());
  const double c = 0.5 / g.hs();
  const int ns = g.ns;
  for (size_t base = 0; base < v.size(); base += ns)
    for (int k = 0; k < ns; ++k) {
      int kp = k + 1 == ns ? 0 : k + 1;
      int km = k == 0 ? ns - 1 : k - 1;
      out[base + k] = c * (v[base + kp] - v[base + km]);
    }
  return out;
}

std::vector<cplx> diff2_s(const std::vector<cplx>& v, const GridSpec& g) {
  std::vector<cplx> out(v.size());
  const double c = 1.0 / (g.hs() * g.hs());
  const int ns = g.ns;
  for (size_t base = 0; base < v.size(); base += ns)
    for (int k = 0; k < ns; ++k) {
      int kp = k + 1 == ns ? 0 : k + 1;
      int km = k == 0 ? ns - 1 : k - 1;
      out[base + k] = c * (v[base + kp] - 2.0 * v[base + k] + v[base + km]);
    }
  return out;
}

}  // namespace

double GridSpec::cell_volume(int i, int j) const {
  double wx = (i == 0 || i == nx - 1) ? 0.5 * hx() : hx();
  double wy = (j == 0 || j == ny - 1) ? 0.5 * hy() : hy();
  return wx * wy * hs();
}

void GridSpec::validate() const {
  if (nx < 2 || ny < 2 || ns < 1) throw DomainError("grid: too few nodes");
  if (!(lx > 0.0) || !(ly > 0.0) || !(ls > 0.0)) throw DomainError("grid: extents must be positive");
}

SampledField SampledField::sample(const GridSpec& g, const std::function<cplx(double, double, double)>& f) {
  SampledField out(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.ns; ++k) out.at(i, j, k) = f(g.x(i), g.y(j), g.s(k));
  return out;
}

cplx SampledField::interpolate(double x, double y, double s) const {
  const auto& g = grid;
  double fx = (x + 0.5 * g.lx) / g.hx();
  double fy = (y + 0.5 * g.ly) / g.hy();
  if (fx < 0.0 || fy < 0.0 || fx > g.nx - 1 || fy > g.ny - 1) return 0.0;
  double fs = (s + 0.5 * g.ls) / g.hs();
  fs -= g.ns * std::floor(fs / g.ns);
  int i0 = std::min(static_cast<int>(fx), g.nx - 2);
  int j0 = std::min(static_cast<int>(fy), g.ny - 2);
  int k0 = static_cast<int>(fs);
  if (k0 >= g.ns) k0 = 0;
  int k1 = k0 + 1 == g.ns ? 0 : k0 + 1;
  double ax = fx - i0, ay = fy - j0, as = fs - std::floor(fs);
  auto lerp_s = [&](int i, int j) {
    size_t b = g.index(i, j, 0);
    return (1.0 - as) * values[b + k0] + as * values[b + k1];
  };
  cplx v00 = lerp_s(i0, j0), v01 = lerp_s(i0, j0 + 1);
  cplx v10 = lerp_s(i0 + 1, j0), v11 = lerp_s(i0 + 1, j0 + 1);
  return (1.0 - ax) * ((1.0 - ay) * v00 + ay * v01) + ax * ((1.0 - ay) * v10 + ay * v11);
}

cplx haar_integral(const SampledField& f) {
  const auto& g = f.grid;
  cplx total = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      cplx line = 0.0;
      size_t b = g.index(i, j, 0);
      for (int k = 0; k < g.ns; ++k) line += f.values[b + k];
      total += g.cell_volume(i, j) * line;
    }
  return total;
}

double lp_norm(const SampledField& f, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
  const auto& g = f.grid;
  if (std::isinf(p)) {
    double m = 0.0;
    for (const auto& v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  double total = 0.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      double line = 0.0;
      size_t b = g.index(i, j, 0);
      for (int k = 0; k < g.ns; ++k) line += std::pow(std::abs(f.values[b + k]), p);
      total += g.cell_volume(i, j) * line;
    }
  return std::pow(total, 1.0 / p);
}

SampledField apply_field(FieldKind which, const SampledField& f) {
  const auto& g = f.grid;
  if (g.nx < 3 || g.ny < 3 || g.ns < 3) throw DomainError("apply_field: grid too small (< 3 nodes per axis)");
  SampledField out(g);
  auto ds = diff_s(f.values, g);
  if (which == FieldKind::S) {
    out.values = std::move(ds);
    return out;
  }
  auto dx = diff_xy(f, 0);
  auto dy = diff_xy(f, 1);
  const double sign = which == FieldKind::Z ? 1.0 : -1.0;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      // Z = (dx - i dy)/2 + (i x + y) ds ; Zbar = (dx + i dy)/2 + (-i x + y) ds
      const cplx coef(g.y(j), sign * g.x(i));
      size_t b = g.index(i, j, 0);
      for (int k = 0; k < g.ns; ++k) {
        size_t n = b + k;
        out.values[n] = 0.5 * (dx[n] - sign * I * dy[n]) + coef * ds[n];
      }
    }
  return out;
}

SampledField sublaplacian_fd(const SampledField& f) {
  const auto& g = f.grid;
  if (g.nx < 4 || g.ny < 4 || g.ns < 3) throw DomainError("sublaplacian_fd: grid too small");
  auto dxx = diff2_xy(f, 0);
  auto dyy = diff2_xy(f, 1);
  auto dss = diff2_s(f.values, g);
  SampledField fs(g);
  fs.values = diff_s(f.values, g);
  auto dxs = diff_xy(fs, 0);
  auto dys = diff_xy(fs, 1);
  SampledField out(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double x = g.x(i), y = g.y(j);
      const double r2 = x * x + y * y;
      size_t b = g.index(i, j, 0);
      for (int k = 0; k < g.ns; ++k) {
        size_t n = b + k;
        out.values[n] = dxx[n] + dyy[n] + 4.0 * r2 * dss[n] + 4.0 * y * dxs[n] - 4.0 * x * dys[n];
      }
    }
  return out;
}

SampledField sublaplacian_composed(const SampledField& f) {
  auto zf = apply_field(FieldKind::Z, f);
  auto zbf = apply_field(FieldKind::Zbar, f);
  auto a = apply_field(FieldKind::Zbar, zf);
  auto b = apply_field(FieldKind::Z, zbf);
  return combine(2.0, a, 2.0, b);
}

SampledField combine(cplx a, const SampledField& f, cplx b, const SampledField& g) {
  require_same_grid(f, g, "combine");
  SampledField out(f.grid);
  for (size_t n = 0; n < out.values.size(); ++n) out.values[n] = a * f.values[n] + b * g.values[n];
  return out;
}

SampledField convolve(const SampledField& f, const SampledField& g, const ConvolveOptions& opt) {
  require_same_grid(f, g, "convolve");
  const auto& G = f.grid;
  struct Node {
    int i, j;
    double x, y, s;
    cplx gv;
  };
  double gmax = 0.0;
  for (const auto& v : g.values) gmax = std::max(gmax, std::abs(v));
  std::vector<Node> nodes;
  for (int i = 0; i < G.nx; ++i)
    for (int j = 0; j < G.ny; ++j)
      for (int k = 0; k < G.ns; ++k) {
        cplx v = g.at(i, j, k);
        if (v == 0.0 || std::abs(v) <= opt.g_floor * gmax) continue;
        nodes.push_back({i, j, G.x(i), G.y(j), G.s(k), v * G.cell_volume(i, j)});
      }
  SampledField out(G);
  const double hs = G.hs();
  const double cx = 0.5 * (G.nx - 1), cy = 0.5 * (G.ny - 1);
  const int nx = G.nx, ny = G.ny, ns = G.ns;
  const std::ptrdiff_t total = static_cast<std::ptrdiff_t>(G.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t n = 0; n < total; ++n) {
    const int iw = static_cast<int>(n / (static_cast<std::ptrdiff_t>(ny) * ns));
    const int jw = static_cast<int>((n / ns) % ny);
    const int kw = static_cast<int>(n % ns);
    const double xw = G.x(iw), yw = G.y(jw), sw = G.s(kw);
    cplx acc = 0.0;
    for (const auto& v : nodes) {
      // w v^{-1} = (z_w - z_v, s_w - s_v - 2 Im(z_w conj z_v))
      const double fx = iw - v.i + cx;
      const double fy = jw - v.j + cy;
      if (fx < 0.0 || fy < 0.0 || fx > nx - 1 || fy > ny - 1) continue;
      const double s = sw - v.s - 2.0 * (yw * v.x - xw * v.y);
      double fs = (s + 0.5 * G.ls) / hs;
      fs -= ns * std::floor(fs / ns);
      int k0 = static_cast<int>(fs);
      if (k0 >= ns) k0 -= ns;
      const int k1 = k0 + 1 == ns ? 0 : k0 + 1;
      const double as = fs - k0;
      const int i0 = std::min(static_cast<int>(fx), nx - 2);
      const int j0 = std::min(static_cast<int>(fy), ny - 2);
      const double ax = fx - i0, ay = fy - j0;
      cplx val = 0.0;
      for (int di = 0; di < 2; ++di) {
        const double wx = di ? ax : 1.0 - ax;
        if (wx == 0.0) continue;
        for (int dj = 0; dj < 2; ++dj) {
          const double wy = dj ? ay : 1.0 - ay;
          if (wy == 0.0) continue;
          const cplx* p = &f.values[G.index(i0 + di, j0 + dj, 0)];
          val += wx * wy * ((1.0 - as) * p[k0] + as * p[k1]);
        }
      }
      acc += val * v.gv;
    }
    out.values[n] = acc;
  }
  return out;
}

double schwartz_seminorm(const SampledField& f, int k) {
  if (k < 0) throw DomainError("schwartz_seminorm: negative order");
  const auto& g = f.grid;
  if (k > 2 || g.nx < 2 * k + 3 || g.ny < 2 * k + 3 || g.ns < 2 * k + 3)
    throw DomainError("schwartz_seminorm: order too large for grid resolution");
  SampledField w(g);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int kk = 0; kk < g.ns; ++kk) {
        const double x = g.x(i), y = g.y(j), s = g.s(kk);
        w.at(i, j, kk) = std::pow(cplx(x * x + y * y, -s), 2 * k) * f.at(i, j, kk);
      }
  double sup = lp_norm(w, INFINITY);
  // words Z_{a1} ... Z_{aj} applied right to left, all lengths 1..k
  std::vector<SampledField> layer{w};
  for (int len = 1; len <= k; ++len) {
    std::vector<SampledField> next;
    for (const auto& h : layer)
      for (auto kind : {FieldKind::Z, FieldKind::Zbar}) {
        next.push_back(apply_field(kind, h));
        sup = std::max(sup, lp_norm(next.back(), INFINITY));
      }
    layer = std::move(next);
  }
  return sup;
}

void write_field_csv(std::ostream& os, const SampledField& f) {
  const auto& g = f.grid;
  os << "# grid d=1 nx=" << g.nx << " ny=" << g.ny << " ns=" << g.ns << " lx=" << format_double(g.lx)
     << " ly=" << format_double(g.ly) << " ls=" << format_double(g.ls) << "\n";
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      for (int k = 0; k < g.ns; ++k) {
        const cplx v = f.at(i, j, k);
        os << i << ',' << j << ',' << k << ',' << format_double(v.real()) << ',' << format_double(v.imag())
           << "\n";
      }
}

SampledField read_field_csv(std::istream& is) {
  std::string line;
  std::map<std::string, std::string> kv;
  bool found = false;
  while (std::getline(is, line)) {
    if (parse_header(line, "# grid", kv)) {
      found = true;
      break;
    }
    if (line.empty() || line[0] == '#') continue;
    break;
  }
  if (!found) throw DomainError("field csv: missing '# grid' header");
  try {
    if (kv.at("d") != "1") throw DomainError("field csv: only d=1 grids are supported");
    GridSpec g{static_cast<int>(parse_int(kv.at("nx"))), static_cast<int>(parse_int(kv.at("ny"))),
               static_cast<int>(parse_int(kv.at("ns"))), parse_double(kv.at("lx")),
               parse_double(kv.at("ly")), parse_double(kv.at("ls"))};
    SampledField f(g);
    size_t rows = 0;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto cols = split_csv(line);
      if (cols.size() != 5) throw DomainError("field csv: expected 5 columns");
      int i = static_cast<int>(parse_int(cols[0])), j = static_cast<int>(parse_int(cols[1])),
          k = static_cast<int>(parse_int(cols[2]));
      if (i < 0 || i >= g.nx || j < 0 || j >= g.ny || k < 0 || k >= g.ns)
        throw DomainError("field csv: index out of range");
      f.at(i, j, k) = cplx(parse_double(cols[3]), parse_double(cols[4]));
      ++rows;
    }
    if (rows != g.size()) throw DomainError("field csv: value count does not match grid");
    return f;
  } catch (const std::out_of_range&) {
    throw DomainError("field csv: incomplete header");
  }
}

}  // namespace heisen
