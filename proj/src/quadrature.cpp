#include "wicm/quadrature.hpp"

#include "wicm/error.hpp"

#include <cmath>
#include <numbers>

namespace wicm {

QuadratureRule gauss_hermite_normal(std::size_t order) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "quadrature order must be positive");
  const auto n = static_cast<int>(order);
  std::vector<double> x(order), w(order);
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    // Initial guesses for the roots of H_n, largest first.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  // Change of variables exp(-x^2) dx -> phi(t) dt with t = sqrt(2) x.
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (std::size_t k = 0; k < order; ++k) {
    // x is filled largest first; store ascending.
    rule.nodes[k] = std::numbers::sqrt2 * x[order - 1 - k];
    rule.weights[k] = w[order - 1 - k] / std::sqrt(std::numbers::pi);
  }
  return rule;
}

const QuadratureRule& gauss_hermite_normal_64() {
  static const QuadratureRule rule = gauss_hermite_normal(64);
  return rule;
}

}  // namespace wicm
