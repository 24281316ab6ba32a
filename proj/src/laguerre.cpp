#include "heisen/laguerre.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "heisen/error.hpp"

namespace heisen {

namespace {

void check_request(int m, int p, double t, const LaguerreCaps& caps) {
  if (m < 0 || p < 0) throw DomainError("laguerre: negative degree or order");
  if (m > caps.max_degree || p > caps.max_order)
    throw DomainError("laguerre: caps exceeded (m=" + std::to_string(m) +
                      ", p=" + std::to_string(p) + ")");
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("laguerre: argument must be finite and >= 0");
}

constexpr double kRescale = 1e150;
const double kLogRescale = std::log(kRescale);

}  // namespace

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c < 1e15 ? std::round(c) : c;
}

double laguerre(int m, int p, double t, const LaguerreCaps& caps) {
  check_request(m, p, t, caps);
  double l0 = 1.0;
  if (m == 0) return l0;
  double l1 = 1.0 + p - t;
  for (int k = 1; k < m; ++k) {
    double l2 = ((2.0 * k + p + 1.0 - t) * l1 - (k + p) * l0) / (k + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

void weighted_laguerre_all(int p, double y, std::span<double> out) {
  const size_t n = out.size();
  if (n == 0) return;
  // Values are carried as L_k * e^{-acc}; the true weighted value is
  // stored * exp(acc - y/2).
  double acc = 0.0;
  double factor = std::exp(-0.5 * y);
  double l0 = 1.0;
  out[0] = factor;
  if (n == 1) return;
  double l1 = 1.0 + p - y;
  out[1] = l1 * factor;
  for (size_t k = 1; k + 1 < n; ++k) {
    double l2 = ((2.0 * k + p + 1.0 - y) * l1 - (k + p) * l0) / (k + 1.0);
    l0 = l1;
    l1 = l2;
    if (std::abs(l1) > kRescale) {
      l0 /= kRescale;
      l1 /= kRescale;
      acc += kLogRescale;
      factor = std::exp(acc - 0.5 * y);
    }
    out[k + 1] = l1 * factor;
  }
}

double weighted_laguerre(int m, int p, double y, const LaguerreCaps& caps) {
  check_request(m, p, y, caps);
  std::vector<double> buf(static_cast<size_t>(m) + 1);
  weighted_laguerre_all(p, y, buf);
  return buf[m];
}

double calibrate_laguerre_bound(int p, int m_max, double y_max, int samples) {
  std::vector<double> buf(static_cast<size_t>(m_max) + 1);
  std::vector<double> norm(buf.size());
  for (size_t m = 0; m < buf.size(); ++m) norm[m] = std::pow(m + 1.0, -p);
  double sup = 0.0;
  for (int i = 0; i <= samples; ++i) {
    // quadratic spacing resolves the peaks near y = 0
    double u = static_cast<double>(i) / samples;
    double y = y_max * u * u;
    weighted_laguerre_all(p, y, buf);
    for (size_t m = 0; m < buf.size(); ++m) sup = std::max(sup, std::abs(buf[m]) * norm[m]);
  }
  return sup;
}

double laguerre_bound_constant(int p) {
  if (p < 0) throw DomainError("laguerre_bound_constant: negative order");
  // 2 * calibrate_laguerre_bound(p) for p = 0..8
  static const double frozen[] = {
      2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0,
  };
  if (p <= 8) return frozen[p];
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(p);
  if (it == cache.end()) it = cache.emplace(p, 2.0 * calibrate_laguerre_bound(p)).first;
  return it->second;
}

}  // namespace heisen
