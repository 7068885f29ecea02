#pragma once

#include <span>
#include <vector>

namespace boltzinv {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1, 1]. Rules are built once per order and shared.
const QuadratureRule& gauss_legendre(int order);

// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int order, double a, double b);

// Composite rule: `order` points on each panel between consecutive breaks.
// Breaks must be non-decreasing; zero-width panels are skipped.
QuadratureRule composite_gauss(std::span<const double> breaks, int order);

// Equally spaced periodic rule on [0, 2pi); exact for trigonometric
// polynomials of degree < count.
QuadratureRule periodic_trapezoid(int count);

}  // namespace boltzinv
