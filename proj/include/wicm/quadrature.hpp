#pragma once

#include <cstddef>
#include <vector>

namespace wicm {

/// Nodes and weights for integrals of the form  int f(t) phi(t) dt  with phi
/// the standard normal density: sum_k weights[k] * f(nodes[k]).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule against the standard normal weight. Nodes are found by
/// Newton iteration on the orthonormal Hermite recurrence.
// Nodes are sorted ascending.
QuadratureRule gauss_hermite_normal(std::size_t order);

/// The 64-node rule, computed once.
const QuadratureRule& gauss_hermite_normal_64();

template <typename F>
double integrate_normal(const QuadratureRule& rule, F&& f) {
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) acc += rule.weights[k] * f(rule.nodes[k]);
  return acc;
}

}  // namespace wicm
