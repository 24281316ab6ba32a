#pragma once

#include <complex>
#include <vector>

namespace heisen {

using cplx = std::complex<double>;

struct GroupPoint {
  std::vector<cplx> z;
  double s = 0.0;

  GroupPoint() = default;
  GroupPoint(std::vector<cplx> z_, double s_) : z(std::move(z_)), s(s_) {}
  // d = 1 convenience
  GroupPoint(cplx z1, double s_) : z{z1}, s(s_) {}

  int dim() const { return static_cast<int>(z.size()); }
  static GroupPoint identity(int d) { return GroupPoint(std::vector<cplx>(d), 0.0); }
};

// Homogeneous dimension 2d + 2.
inline int homogeneous_dim(int d) { return 2 * d + 2; }

GroupPoint group_mul(const GroupPoint& a, const GroupPoint& b);
GroupPoint group_inv(const GroupPoint& a);
GroupPoint dilate(double a, const GroupPoint& w);
double gauge(const GroupPoint& w);
// Left-invariant distance rho(a^{-1} b).
double gauge_distance(const GroupPoint& a, const GroupPoint& b);

// |z|^2 of a point.
double z_norm2(const GroupPoint& w);

}  // namespace heisen
