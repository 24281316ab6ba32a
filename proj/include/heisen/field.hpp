#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "heisen/group.hpp"

namespace heisen {

// d = 1 physical grid. x and y nodes include both endpoints of
// [-l/2, l/2]; the s axis is periodic with nodes -ls/2 + k ls/ns.
struct GridSpec {
  int nx = 0, ny = 0, ns = 0;
  double lx = 0.0, ly = 0.0, ls = 0.0;

  double hx() const { return lx / (nx - 1); }
  double hy() const { return ly / (ny - 1); }
  double hs() const { return ls / ns; }
  double x(int i) const { return -0.5 * lx + i * hx(); }
  double y(int j) const { return -0.5 * ly + j * hy(); }
  double s(int k) const { return -0.5 * ls + k * hs(); }
  size_t size() const { return static_cast<size_t>(nx) * ny * ns; }
  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(i) * ny + j) * ns + k;
  }
  // Haar volume element of node (i, j, *): trapezoid in x, y, rectangle in s.
  double cell_volume(int i, int j) const;

  void validate() const;
  bool operator==(const GridSpec&) const = default;

  static GridSpec cube(int n, double lxy, int ns, double ls) { return {n, n, ns, lxy, lxy, ls}; }
};

struct SampledField {
  GridSpec grid;
  std::vector<cplx> values;

  SampledField() = default;
  explicit SampledField(const GridSpec& g) : grid(g), values(g.size()) { g.validate(); }

  cplx& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }
  const cplx& at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }

  static SampledField sample(const GridSpec& g, const std::function<cplx(double, double, double)>& f);

  // Trilinear interpolation; zero outside the x, y extent, periodic in s.
  cplx interpolate(double x, double y, double s) const;
};

enum class FieldKind { Z, Zbar, S };

cplx haar_integral(const SampledField& f);
// p may be +infinity.
double lp_norm(const SampledField& f, double p);

SampledField apply_field(FieldKind which, const SampledField& f);
// Compact second-order stencil for X^2 + Y^2, X = dx + 2y ds, Y = dy - 2x ds.
SampledField sublaplacian_fd(const SampledField& f);
// 2 (Z Zbar + Zbar Z) composed from apply_field; wider stencil, kept for
// cross-checks.
SampledField sublaplacian_composed(const SampledField& f);

struct ConvolveOptions {
  // g nodes with |g| <= floor * max|g| are skipped.
  double g_floor = 0.0;
};
// (f * g)(w) = sum_v f(w v^{-1}) g(v) dV.
SampledField convolve(const SampledField& f, const SampledField& g, const ConvolveOptions& opt = {});

double schwartz_seminorm(const SampledField& f, int k);

// Pointwise linear combination a*f + b*g on a shared grid.
SampledField combine(cplx a, const SampledField& f, cplx b, const SampledField& g);

void write_field_csv(std::ostream& os, const SampledField& f);
SampledField read_field_csv(std::istream& is);

}  // namespace heisen
