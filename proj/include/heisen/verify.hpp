#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "heisen/field.hpp"
#include "heisen/littlewood_paley.hpp"
#include "heisen/report.hpp"
#include "heisen/spectral.hpp"

namespace heisen {

// Nodes t_i = 4^{k_lo + i / per} on [4^{k_lo}, 4^{k_hi}] with trapezoid
// weights for dt/t. Dilating by 2^k shifts the nodes by per * k.
struct TGrid {
  int k_lo = 0, k_hi = 0, per = 8;
  std::vector<double> t, w;

  static TGrid make(int k_lo, int k_hi, int per = 8);
  double t_min() const { return t.front(); }
  double t_max() const { return t.back(); }
};

// Covers at least [4^{-(j_max+2)}, 4^{-(j_min-2)}], widened until the parts
// of int (t mu)^a e^{-t mu} dt/t outside the grid fall below tol times the
// whole for every mu in the spectra of blocks j_min..j_max.
TGrid tgrid_for(int j_min, int j_max, double a, double tol = 1e-6, int per = 8);

// C_s^{-1} sum_i w_i (t_i mu)^{s+1} e^{-t_i mu}, which reproduces 1 on the
// covered spectrum.
double reproducing_weight(const TGrid& tg, double s, double mu);

// Applies the reproducing multiplier to each block of u and compares with
// the block; measured is the worst relative error.
VerificationReport tgrid_self_test(const TGrid& tg, double s, const RadialProfile& u, const DyadicPartition& part,
                                   int j_min, int j_max);

// ||e^{t Delta} u||_p at each t; p = 2 uses Plancherel.
std::vector<double> heat_flow_norms(const RadialProfile& u, const std::vector<double>& t, double exponent,
                                    const QuadratureHints& hints = {});

using IndexedProfiles = std::vector<std::pair<int, RadialProfile>>;

struct DecayOptions {
  // nodes in t 4^j
  std::vector<double> tau{1.0 / 32, 1.0 / 16, 1.0 / 8, 0.25, 0.375, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  double uniformity_tol = 1.2;
  // ratios below this are left out of the fit
  double floor = 1e-12;
  QuadratureHints hints;
};

// Fits log(||e^{t Delta} u_j||_p / ||u_j||_p) ~ log C_j - c_j t 4^j for each
// (j, u_j); measured is max c_j / min c_j.
VerificationReport decay_check(const IndexedProfiles& blocks, double exponent, const DecayOptions& opt = {});

struct CharacterizationValue {
  double lhs = 0.0, rhs = 0.0;
  double ratio() const { return rhs / lhs; }
};

struct CharacterizationOptions {
  // allowed share of the t-integral beyond the grid ends
  double tail_tolerance = 1e-2;
  double drift_tol = 1e-3;
  NormOptions norm;
};

// lhs = ||u||_{B^{-2s}_{p,r}} by blocks, rhs = || t^s ||e^{t Delta} u||_p ||
// in L^r(dt/t) on the t-grid.
CharacterizationValue heat_characterization_value(const RadialProfile& u, double s, double exponent, double r,
                                                  const DyadicPartition& part, const TGrid& tg,
                                                  const CharacterizationOptions& opt = {});

// Runs each base profile and its dilates u o delta_{2^k}; measured is the
// largest relative change of rhs / lhs under dilation, fitted_C the smallest
// C0 with every ratio in [1/C0, C0].
VerificationReport heat_characterization(const std::vector<RadialProfile>& base, const std::vector<int>& dilates,
                                         double s, double exponent, double r, const DyadicPartition& part,
                                         const TGrid& tg, const CharacterizationOptions& opt = {});

// A function given as a sum of parts at separated scales; L^p norms
// synthesize each part over its own extent (see split_lp_norm).
using ScaleParts = std::vector<RadialProfile>;

struct RefinedSobolevValue {
  double lq = 0.0, sobolev = 0.0, besov = 0.0;
  double theta = 0.0;  // s p / N
  double ratio() const { return lq / (std::pow(sobolev, 1.0 - theta) * std::pow(besov, theta)); }
  // refined right side over the plain Sobolev right side, constants aside
  double gain() const { return std::pow(besov / sobolev, theta); }
};

struct SobolevOptions {
  double drift_tol = 1e-2;
  NormOptions norm;
};

// ||f||_{L^q}, q = pN / (N - ps), against ||f||_{W^{s,p}} and the heat-flow
// form of ||f||_{B^{s - N/p}_{inf,inf}}, sup_t t^{(N/p - s)/2} ||e^{t Delta} f||_inf.
RefinedSobolevValue refined_sobolev_value(const ScaleParts& f, double s, double exponent, const TGrid& tg,
                                          const SobolevOptions& opt = {});
RefinedSobolevValue refined_sobolev_value(const RadialProfile& f, double s, double exponent, const TGrid& tg,
                                          const SobolevOptions& opt = {});
VerificationReport refined_sobolev_check(const std::vector<ScaleParts>& base, const std::vector<int>& dilates,
                                         double s, double exponent, const TGrid& tg, const SobolevOptions& opt = {});

// sup_t t^{N/2p} ||e^{t Delta} u||_inf over ||u||_p.
VerificationReport besov_embedding_check(const std::vector<ScaleParts>& base, const std::vector<int>& dilates,
                                         double exponent, const TGrid& tg, const SobolevOptions& opt = {});

// Gauge radius below which balls hold only their center node.
double grid_resolution(const GridSpec& g);
// 2^{k/2} grid_resolution for k >= 1, capped where a ball still fits the grid.
std::vector<double> default_radii(const GridSpec& g);

// Grid nodes w' with rho(w^{-1} w') < R, for a d = 1 grid and any center.
long long ball_count(const GridSpec& g, double x, double y, double s, double R);

// Mf(w) = max over radii of the mean of |f| over the grid nodes of B(w, R).
SampledField maximal_function(const SampledField& f, const std::vector<double>& radii);

// ||Mf||_p / ||f||_p over the fields; fitted_C is the largest ratio, A_p.
// Passes when every ratio is finite and at most max_constant.
VerificationReport maximal_lp_check(const std::vector<SampledField>& fields, double exponent,
                                    const std::vector<double>& radii, double max_constant = 16.0);

// m(B(0, 2R)) / m(B(0, R)) by node counting on each grid.
VerificationReport ball_volume_check(const std::vector<GridSpec>& grids, double R, double tol = 0.1);

struct MaximalOptions {
  std::vector<double> radii;  // default_radii when empty
  // relative margin allowed per node
  double slack = 0.0;
  // psi at the grid boundary relative to its peak
  double edge_tolerance = 1e-3;
  double g_floor = 0.0;
};

// |f * phi|(w) <= ||psi||_1 Mf(w) at every node, psi the radially decreasing
// majorant of phi; measured is the worst (|f * phi| - ||psi||_1 Mf) / max Mf.
VerificationReport maximal_convolution_check(const SampledField& f, const SampledField& phi,
                                             const MaximalOptions& opt = {});

// Built-in radial function families, all band-limited.
struct FamilyParams {
  int j = 0;
  int dilate = 0;
  int modes = 3;
  // two-bump: scale gap, and the (s, p) whose Sobolev norms are matched
  int gap = 2;
  double s = 0.5;
  double p = 2.0;
};

std::vector<std::string> family_names();
// zero, gaussian, one-mode, localized-ring, two-bump; the parts are the
// two bumps for two-bump and the whole function otherwise.
ScaleParts family_parts(const GridPtr& grid, const std::string& family, const FamilyParams& fp = {});
RadialProfile family_profile(const GridPtr& grid, const std::string& family, const FamilyParams& fp = {});

// Default spectral grid for the checks: d, 8 modes, |lambda| in
// [2^-12, 2^12], 32-point panels.
GridPtr verify_grid(int d = 1);

}  // namespace heisen
