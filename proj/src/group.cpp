#include "heisen/group.hpp"

#include <cmath>

#include "heisen/error.hpp"

namespace heisen {

GroupPoint group_mul(const GroupPoint& a, const GroupPoint& b) {
  if (a.dim() != b.dim()) throw DomainError("group_mul: dimension mismatch");
  GroupPoint out;
  out.z.resize(a.z.size());
  double twist = 0.0;
  for (size_t j = 0; j < a.z.size(); ++j) {
    out.z[j] = a.z[j] + b.z[j];
    twist += std::imag(a.z[j] * std::conj(b.z[j]));
  }
  out.s = a.s + b.s + 2.0 * twist;
  return out;
}

GroupPoint group_inv(const GroupPoint& a) {
  GroupPoint out = a;
  for (auto& v : out.z) v = -v;
  out.s = -a.s;
  return out;
}

GroupPoint dilate(double a, const GroupPoint& w) {
  if (!(a > 0.0)) throw DomainError("dilate: factor must be positive");
  GroupPoint out = w;
  for (auto& v : out.z) v *= a;
  out.s = a * a * w.s;
  return out;
}

double z_norm2(const GroupPoint& w) {
  double r2 = 0.0;
  for (const auto& v : w.z) r2 += std::norm(v);
  return r2;
}

double gauge(const GroupPoint& w) {
  double r2 = z_norm2(w);
  return std::sqrt(std::sqrt(r2 * r2 + w.s * w.s));
}

double gauge_distance(const GroupPoint& a, const GroupPoint& b) {
  return gauge(group_mul(group_inv(a), b));
}

}  // namespace heisen
