#pragma once

#include <cstddef>
#include <vector>

namespace vanish {

/// Nodes and weights of a composite rule on [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Composite 8-point Gauss–Legendre rule with `panels` equal panels on [a, b].
/// Nodes come out in increasing order.
QuadratureRule gauss_legendre8(double a, double b, std::size_t panels = 1);

template <class F>
double integrate(const QuadratureRule& rule, F&& f) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) s += rule.weights[q] * f(rule.nodes[q]);
  return s;
}

}  // namespace vanish
