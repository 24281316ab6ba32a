#pragma once

#include <vector>

namespace heisen {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule of the given order on [-1, 1].
const QuadratureRule& gauss_legendre(int order);

// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
QuadratureRule composite_gauss(double a, double b, int panels, int order);

// Differentiation matrix for Lagrange interpolation through `nodes`:
// D(i, j) = l_j'(x_i), stored row-major.
std::vector<double> lagrange_derivative_matrix(const std::vector<double>& nodes);

}  // namespace heisen
