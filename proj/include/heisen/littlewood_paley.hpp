#pragma once

#include <cmath>
#include <functional>
#include <iosfwd>
#include <limits>
#include <vector>

#include "heisen/report.hpp"
#include "heisen/spectral.hpp"

namespace heisen {

// chi = 1 on |tau| <= 1, 0 on |tau| >= 2, with an exp(-1/x^k) transition;
// R*(tau) = chi(tau/4) - chi(tau) is supported in 1 <= |tau| <= 8 and equals
// 1 on 2 <= |tau| <= 4. Block j uses R*(4^{-j} tau).
class DyadicPartition {
 public:
  static constexpr double kSupportLo = 1.0;
  static constexpr double kSupportHi = 8.0;
  static constexpr double kPlateauLo = 2.0;
  static constexpr double kPlateauHi = 4.0;

  DyadicPartition(int smoothness, int j_min, int j_max);

  int smoothness() const { return smoothness_; }
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }

  double chi(double tau) const;
  double rstar(double tau) const { return chi(tau / 4.0) - chi(tau); }
  double low(double tau) const { return chi(tau); }
  double block(int j, double tau) const { return rstar(std::ldexp(tau, -2 * j)); }

  // Worst partition-of-unity residual found during validation.
  double residual() const { return residual_; }

  void write_csv(std::ostream& os, int samples = 2001) const;

 private:
  int smoothness_, j_min_, j_max_;
  double residual_ = 0.0;
};

// Validates the telescoping identities on 10^4 log-spaced nodes; throws
// ToleranceError if a residual exceeds 1e-12.
DyadicPartition build_partition(int smoothness, int j_min, int j_max);

// |1 - chi(tau) - sum_{0 <= j <= j_top} R*(4^{-j} tau)| and
// |1 - sum_{j_lo <= j <= j_hi} R*(4^{-j} tau)| over log-spaced tau covered by
// the respective ranges.
double low_pass_residual(const DyadicPartition& part, int nodes = 10000);
double block_sum_residual(const DyadicPartition& part, int nodes = 10000);

RadialProfile project_block(const RadialProfile& p, int j, const DyadicPartition& part);
RadialProfile low_pass(const RadialProfile& p, int j, const DyadicPartition& part);

struct BesovParams {
  double s = 0.0;
  double p = 2.0;
  double r = 2.0;
};

struct NormOptions {
  QuadratureHints hints;
  // allowed relative L2 mass outside the block range
  double tail_tolerance = 1e-3;
};

double profile_norm(const RadialProfile& p, double exponent, const NormOptions& opt = {});

struct BesovResult {
  double value = 0.0;
  std::vector<std::pair<int, double>> blocks;  // (q, ||Delta_q u||_p)
  double tail_fraction = 0.0;
};

BesovResult besov_blocks(const RadialProfile& p, const BesovParams& b, const DyadicPartition& part,
                         const NormOptions& opt = {});
double besov_norm(const RadialProfile& p, const BesovParams& b, const DyadicPartition& part,
                  const NormOptions& opt = {});
double sobolev_norm(const RadialProfile& p, double s, double exponent, const NormOptions& opt = {});

struct Ring {
  double r1 = 1.0;
  double r2 = 4.0;
};

using Shape = std::function<cplx(double)>;

// Smooth bump in log tau supported on [sqrt(r1), sqrt(r2)], peak 1 at
// position `at` in (0, 1) of the log interval, with relative log width
// `width` in (0, 1].
Shape ring_bump(const Ring& ring, double at = 0.5, double width = 1.0);

// R_m(lambda) = w_m shape((2m+d) 4^{-j} |lambda|); w_m defaults to 1 for
// every mode.
RadialProfile make_localized(const GridPtr& grid, int j, const Ring& ring, const Shape& shape,
                             const std::vector<cplx>& mode_weights = {});

struct LocalizedSpec {
  Shape shape;
  std::vector<cplx> mode_weights;
};

// Deterministic family of ring-localized shapes with random mode weights.
std::vector<LocalizedSpec> ring_family(const Ring& ring, int count, int modes, unsigned long long seed);

struct BernsteinOptions {
  Ring ring{1.0, 2.25};
  std::vector<int> j_set{0, 1, 2, 3, 4};
  double slack = 1.5;
  NormOptions norm;
};

VerificationReport bernstein_check(const GridPtr& grid, double rho, double exponent,
                                   const std::vector<LocalizedSpec>& family, const BernsteinOptions& opt = {});

}  // namespace heisen
