#include "heisen/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "heisen/error.hpp"

namespace heisen {

namespace {

QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // one more derivative evaluation at the converged root
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre(int order) {
  if (order < 1 || order > 256) throw DomainError("gauss_legendre: order out of range");
  static std::mutex mu;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) {
    if (order == 1) {
      it = cache.emplace(1, QuadratureRule{{0.0}, {2.0}}).first;
    } else {
      it = cache.emplace(order, build_gauss_legendre(order)).first;
    }
  }
  return it->second;
}

QuadratureRule composite_gauss(double a, double b, int panels, int order) {
  if (panels < 1) throw DomainError("composite_gauss: need at least one panel");
  const auto& ref = gauss_legendre(order);
  QuadratureRule out;
  out.nodes.reserve(static_cast<size_t>(panels) * order);
  out.weights.reserve(out.nodes.capacity());
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    for (int q = 0; q < order; ++q) {
      out.nodes.push_back(lo + 0.5 * h * (ref.nodes[q] + 1.0));
      out.weights.push_back(0.5 * h * ref.weights[q]);
    }
  }
  return out;
}

std::vector<double> lagrange_derivative_matrix(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<double> bw(n, 1.0);
  for (size_t j = 0; j < n; ++j)
    for (size_t k = 0; k < n; ++k)
      if (k != j) bw[j] /= (x[j] - x[k]);
  std::vector<double> D(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = bw[j] / bw[i] / (x[i] - x[j]);
      D[i * n + j] = v;
      diag -= v;
    }
    D[i * n + i] = diag;
  }
  return D;
}

}  // namespace heisen
