#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "heisen/field.hpp"
#include "heisen/group.hpp"
#include "heisen/spectral.hpp"

namespace heisen {

// Multiplier e^{-t 4|lambda|(2m+d)}.
RadialProfile heat_apply(const RadialProfile& p, double t);

// Upper bound on the sup of the part of the heat kernel series left out when
// keeping m <= m_max and lambda_min <= |lambda| <= lambda_max; lambda_max may
// be infinite and lambda_min zero.
double tail_bound(int m_max, double lambda_max, double lambda_min, double t, int d);

struct KernelSeriesOptions {
  // absolute truncation tolerance for h at t = 1
  double tol = 1e-6;
  int m_cap = 1 << 15;
};

// Smallest power-of-two truncation meeting opt.tol; throws ToleranceError
// if none fits under m_cap.
int kernel_truncation(int d, const KernelSeriesOptions& opt = {});

// h(r, s) at t = 1, lambda integrated in closed form, m summed to m_max and
// extrapolated in 1/m_max.
double heat_kernel_value(int d, double r, double s, int m_max);

// h_t at the given (|z|, s) points via the t = 1 series and exact scaling.
std::vector<double> kernel_eval(int d, const std::vector<std::pair<double, double>>& points, double t,
                                const KernelSeriesOptions& opt = {});

struct KernelLayout {
  double r_max = 8.0;
  double s_max = 32.0;
  double step = 0.1;
};

// h at t = 1 on the (r, s >= 0) lattice of a layout; h is even in s.
struct KernelTable {
  int d = 1;
  int m_max = 0;
  double lambda_max = 0.0;
  double tol = 0.0;
  double tail = 0.0;
  KernelLayout layout;
  Eigen::MatrixXd values;  // rows over r, columns over s

  double r_node(int i) const { return i * layout.step; }
  double s_node(int l) const { return l * layout.step; }
  double peak() const;
  // largest |h| on the outer r column and the last s row, relative to peak
  double edge_ratio() const;
  bool contains(double r, double s) const;
  // cubic interpolation (in log h where positive); throws DomainError
  // outside the table
  double at(double r, double s) const;
};

KernelTable build_kernel_table(int d, const KernelLayout& layout = {}, const KernelSeriesOptions& opt = {});

void write_kernel_csv(std::ostream& os, const KernelTable& table);
KernelTable read_kernel_csv(std::istream& is);

// Reads the table from cache_dir when its header and layout match, otherwise
// builds it and writes it atomically. An empty cache_dir disables caching.
KernelTable load_kernel_table(int d, const KernelLayout& layout, const KernelSeriesOptions& opt,
                              const std::string& cache_dir);
std::string kernel_cache_path(const std::string& cache_dir, int d, const KernelLayout& layout, double tol);

// t^{-(d+1)} h(|z| / sqrt t, s / t).
double kernel_scaled(double t, const GroupPoint& w, const KernelTable& table);
double kernel_scaled(double t, double r, double s, const KernelTable& table);

// Cell averages of h_t on a d = 1 grid, sub-sampled per cell; nodes beyond
// the table are zero, which requires the table edge below 1e-4 of its peak.
SampledField sample_heat_kernel(const GridSpec& grid, double t, const KernelTable& table, int sub_xy = 4,
                                int sub_s = 8);

// Largest explicit Euler step allowed for sublaplacian_fd on this grid.
double fd_max_step(const GridSpec& grid);

// u' = u + dt sublaplacian_fd(u) with the x, y edge nodes held at their
// initial values.
SampledField fd_heat_oracle(const SampledField& u0, double t, int steps);

}  // namespace heisen
