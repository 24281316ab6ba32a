#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "heisen/field.hpp"
#include "heisen/report.hpp"

namespace heisen {

// 2^{d-1} / pi^{d+1}
double plancherel_constant(int d);
// Surface measure of the unit sphere in C^d = R^{2d}: 2 pi^d / (d-1)!
double sphere_measure(int d);
// Joint spectrum value 4 |lambda| (2m + d).
inline double eigenvalue(int m, double lambda, int d) { return 4.0 * std::abs(lambda) * (2.0 * m + d); }

struct SpectralGridParams {
  int d = 1;
  int m_max = 64;
  double lambda_min = 0x1p-12;
  double lambda_max = 0x1p12;
  int order = 16;
};

// Signed dyadic Gauss-Legendre panels on [-L, -l] u [l, L]. Nodes are sorted
// ascending, so node k and node size()-1-k are mirror images.
class SpectralGrid {
 public:
  explicit SpectralGrid(const SpectralGridParams& p);
  static std::shared_ptr<const SpectralGrid> make(const SpectralGridParams& p) {
    return std::make_shared<const SpectralGrid>(p);
  }

  const SpectralGridParams& params() const { return params_; }
  int d() const { return params_.d; }
  int m_max() const { return params_.m_max; }
  int order() const { return params_.order; }
  int panels() const { return panels_; }  // per sign
  size_t size() const { return lambda_.size(); }
  double lambda(size_t k) const { return lambda_[k]; }
  double weight(size_t k) const { return weight_[k]; }
  const std::vector<double>& lambdas() const { return lambda_; }
  const std::vector<double>& weights() const { return weight_; }

  size_t mirror(size_t k) const { return size() - 1 - k; }
  // Panel index on its own side (0 = innermost) and position within it.
  int panel_of(size_t k) const;
  int slot_of(size_t k) const;
  size_t index(int sign, int panel, int slot) const;
  // Node at lambda_k * 2^{panel_shift}, if on the grid.
  std::optional<size_t> shifted(size_t k, int panel_shift) const;
  // Reference-panel Lagrange derivative matrix (order x order, row-major).
  const std::vector<double>& diff_matrix() const { return diff_; }
  // Panel [a, b] containing node k, as |lambda| bounds.
  std::pair<double, double> panel_bounds(size_t k) const;

  bool same_as(const SpectralGrid& o) const;

 private:
  SpectralGridParams params_;
  int panels_ = 0;
  std::vector<double> lambda_, weight_, diff_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

// Matrix R_m(lambda_k): rows m = 0..m_max, columns over grid nodes.
class RadialProfile {
 public:
  RadialProfile() = default;
  explicit RadialProfile(GridPtr grid);
  RadialProfile(GridPtr grid, Eigen::MatrixXcd values);

  const SpectralGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  cplx operator()(int m, size_t k) const { return values_(m, static_cast<Eigen::Index>(k)); }

  bool is_zero() const;
  // Largest row with a nonzero entry, -1 for the zero profile.
  int top_mode() const;
  // min and max |lambda| over nonzero columns; {0, 0} for the zero profile.
  std::pair<double, double> lambda_range() const;
  // min and max of 4|lambda|(2m+d) over nonzero entries.
  std::pair<double, double> spectrum_range() const;

 private:
  GridPtr grid_;
  Eigen::MatrixXcd values_;
};

RadialProfile operator+(const RadialProfile& a, const RadialProfile& b);
RadialProfile operator*(cplx c, const RadialProfile& a);
RadialProfile operator-(const RadialProfile& a, const RadialProfile& b);

// Quadrature in (r, s): r_weight includes the radial measure w r^{2d-1};
// s nodes are uniform with trapezoid weights.
struct RadialQuadrature {
  int d = 1;
  std::vector<double> r, r_weight;
  std::vector<double> s, s_weight;
  // Length of the Gauss panels in r; bounds the oscillation the rule resolves.
  double r_panel = 0.0;

  double s_step() const { return s.size() > 1 ? s[1] - s[0] : 1.0; }
  // Largest |lambda| representable on the s-grid.
  double band() const;
  // Largest joint-spectrum value whose Laguerre functions are resolved in r.
  double resolved_spectrum() const;
};

RadialQuadrature make_quadrature(int d, double r_max, int r_panels, int r_order, double s_half, int n_s);

struct QuadratureHints {
  // e-folds of Gaussian decay kept in r
  double r_efolds = 40.0;
  // s half-extent in units of 1/lambda_lo; the lambda panels only resolve
  // e^{i lambda s} for s up to about order / panel length
  double s_extent = 10.0;
  // s nodes per period at the highest frequency
  double s_nodes_per_period = 8.0;
  int r_order = 16;
  // r oscillation budget per panel, in wavelengths of the squared integrand
  double waves_per_panel = 1.5;
  int min_r_panels = 6;
};

// Quadrature adapted to the support of a profile; dilating the profile by
// 2^k maps it to the exactly scaled quadrature.
RadialQuadrature quadrature_for(const RadialProfile& p, const QuadratureHints& hints = {});

struct RadialFunction {
  RadialQuadrature quad;
  Eigen::MatrixXcd values;  // rows over r, columns over s

  static RadialFunction sample(const RadialQuadrature& q, const std::function<cplx(double, double)>& f);
  // max|f| on the outermost r ring and the two s ends, relative to max|f|
  double boundary_ratio() const;
};

struct ForwardOptions {
  // relative size allowed at the grid boundary and near the s band edge
  double decay_floor = 1e-6;
  // restrict evaluation to m <= m_eval (default: grid m_max)
  int m_eval = -1;
  // restrict evaluation to |lambda| <= lambda_eval (default: s band)
  double lambda_eval = 0.0;
};

RadialProfile forward_transform(const RadialFunction& f, const GridPtr& grid, const ForwardOptions& opt = {});

// Radial transform of a d = 1 sampled field about the origin; for radial
// fields this is R_m(lambda). Nodes above the s band or unresolved in the
// x, y spacing are left at zero.
RadialProfile forward_transform_sampled(const SampledField& f, const GridPtr& grid, int m_eval,
                                        double lambda_eval);

struct InverseOptions {
  // allowed relative Plancherel weight of the last Laguerre row
  double tail_tolerance = 1e-6;
};

RadialFunction inverse_transform(const RadialProfile& p, const RadialQuadrature& q, const InverseOptions& opt = {});
// Pointwise evaluation of the inversion series.
Eigen::MatrixXcd synthesize(const RadialProfile& p, const std::vector<double>& r, const std::vector<double>& s);
// Relative Plancherel weight of row m_max.
double mode_tail_fraction(const RadialProfile& p);

// Repeated synthesis of profiles sharing a support pattern on one quadrature.
class Synthesizer {
 public:
  Synthesizer(const RadialProfile& pattern, const RadialQuadrature& q);
  RadialFunction operator()(const RadialProfile& p) const;
  const RadialQuadrature& quadrature() const { return quad_; }

 private:
  RadialQuadrature quad_;
  GridPtr grid_;
  std::vector<Eigen::Index> cols_;
  int m_hi_ = -1;
  std::vector<double> table_;  // [col][r][m]
  Eigen::MatrixXcd phase_;     // cols x s
};

double plancherel_norm(const RadialProfile& p);
// sum_m C(m+d-1, m) int |R_m| |lambda|^d, times the Plancherel constant:
// an upper bound for sup |f|.
double sup_bound(const RadialProfile& p);

double radial_lp_norm(const RadialFunction& f, double p);
// L^p norm of the inverse transform, on an adapted quadrature; p = 2 uses
// the quadrature too (see plancherel_norm for the spectral value).
double profile_lp_norm(const RadialProfile& p, double exponent, const QuadratureHints& hints = {});
// Inverse transform of the sum of parts at separated scales, each part
// synthesized only for |s| <= s_extent / (its smallest |lambda|), the extent
// its own adapted quadrature would have. Past that range the coarse lambda
// panels of a low part's scale no longer resolve a high part's transform.
RadialFunction split_inverse(const std::vector<RadialProfile>& parts, const RadialQuadrature& q, double s_extent);
// L^p norm of the sum of parts through split_inverse on the sum's quadrature.
double split_lp_norm(const std::vector<RadialProfile>& parts, double exponent, const QuadratureHints& hints = {});
// max|f| refined off the quadrature nodes by pattern search on the
// synthesis series of p, which f must sample.
double refine_sup(const RadialProfile& p, const RadialFunction& f);

RadialProfile multiplier(const RadialProfile& p, const std::function<cplx(int, double)>& phi);
// Profile of u o delta_{2^k}.
RadialProfile dilate_profile(const RadialProfile& p, int k);

// Compares the transform of (is - |z|^2) f with its expression through
// d/dlambda and neighbouring modes of the transform of f.
VerificationReport check_weight_identity(const RadialFunction& f, const GridPtr& grid, int m_check = 8,
                                         const ForwardOptions& opt = {});
VerificationReport summability(const RadialProfile& p, double rho);

void write_profile_csv(std::ostream& os, const RadialProfile& p);
RadialProfile read_profile_csv(std::istream& is);

}  // namespace heisen
