#pragma once

// Reference implementations used only by the tests. They deliberately take a
// different computational route from the library code they check.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Rule {
  VectorXd nodes;
  VectorXd weights;
};

// Gauss-Hermite rule for the standard normal density via Golub-Welsch: the
// probabilists' Hermite Jacobi matrix has zero diagonal and off-diagonal
// sqrt(k); nodes are its eigenvalues and weights the squared first components
// of the normalized eigenvectors.
inline Rule golub_welsch_normal(Index order) {
  MatrixXd J = MatrixXd::Zero(order, order);
  for (Index k = 1; k < order; ++k) {
    J(k, k - 1) = std::sqrt(static_cast<double>(k));
    J(k - 1, k) = J(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(J);
  Rule rule{eig.eigenvalues(), VectorXd(order)};
  for (Index i = 0; i < order; ++i) rule.weights(i) = eig.eigenvectors()(0, i) * eig.eigenvectors()(0, i);
  return rule;
}

inline double integrate_normal(const Rule& rule, const std::function<double(double)>& f) {
  double total = 0.0;
  for (Index i = 0; i < rule.nodes.size(); ++i) total += rule.weights(i) * f(rule.nodes(i));
  return total;
}

inline VectorXd centered(const VectorXd& g) { return (g.array() - g.mean()).matrix(); }

// Residual process with complex exponentials: |n^{-1/2} sum g0_j exp(i t e_j)|^2.
inline double complex_process_sq(const VectorXd& g, const VectorXd& e, double t) {
  const VectorXd g0 = centered(g);
  std::complex<double> sum = 0.0;
  for (Index j = 0; j < g.size(); ++j) sum += g0(j) * std::exp(std::complex<double>(0.0, t * e(j)));
  return std::norm(sum) / static_cast<double>(g.size());
}

inline double process_value(const VectorXd& g, const VectorXd& e, double t) {
  const VectorXd g0 = centered(g);
  double sum = 0.0;
  for (Index j = 0; j < g.size(); ++j) sum += g0(j) * (std::cos(t * e(j)) + std::sin(t * e(j)));
  return sum / std::sqrt(static_cast<double>(g.size()));
}

// Full double sum, column-major order, no symmetry shortcut.
inline double wicm_double_sum(const VectorXd& g, const VectorXd& e) {
  const VectorXd g0 = centered(g);
  double total = 0.0;
  for (Index k = 0; k < g.size(); ++k) {
    for (Index j = 0; j < g.size(); ++j) {
      const double d = e(j) - e(k);
      total += g0(j) * g0(k) * std::exp(-0.5 * d * d);
    }
  }
  return total / static_cast<double>(g.size());
}

inline double icm_double_sum(const MatrixXd& X, const VectorXd& e) {
  double total = 0.0;
  for (Index k = 0; k < X.rows(); ++k) {
    for (Index j = 0; j < X.rows(); ++j) total += e(j) * e(k) * std::exp(-0.5 * (X.row(j) - X.row(k)).squaredNorm());
  }
  return total / static_cast<double>(X.rows());
}

// Monte Carlo integral form of the ICM statistic:
// E_t |n^{-1/2} sum e_j exp(i t'X_j)|^2 with t ~ N(0, I). Returns mean and
// standard error.
inline std::pair<double, double> icm_monte_carlo(const MatrixXd& X, const VectorXd& e, Index draws,
                                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double n = static_cast<double>(X.rows());
  double sum = 0.0;
  double sum_sq = 0.0;
  VectorXd t(X.cols());
  for (Index b = 0; b < draws; ++b) {
    for (Index k = 0; k < t.size(); ++k) t(k) = normal(rng);
    std::complex<double> z = 0.0;
    for (Index j = 0; j < X.rows(); ++j) z += e(j) * std::exp(std::complex<double>(0.0, X.row(j).dot(t)));
    const double v = std::norm(z) / n;
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(draws);
  const double var = sum_sq / static_cast<double>(draws) - mean * mean;
  return {mean, std::sqrt(var / static_cast<double>(draws))};
}

// Central finite-difference gradient of f at beta.
inline VectorXd finite_difference(const std::function<double(const VectorXd&)>& f, const VectorXd& beta,
                                  double h = 1e-6) {
  VectorXd grad(beta.size());
  for (Index k = 0; k < beta.size(); ++k) {
    VectorXd up = beta;
    VectorXd down = beta;
    up(k) += h;
    down(k) -= h;
    grad(k) = (f(up) - f(down)) / (2.0 * h);
  }
  return grad;
}

// Ordinary least squares through the normal equations (Cholesky), a different
// route from the SVD solver in the library.
inline VectorXd normal_equations(const MatrixXd& D, const VectorXd& y) {
  return (D.transpose() * D).ldlt().solve(D.transpose() * y);
}

// Cumulative slicing matrix by explicit double loop over thresholds.
inline MatrixXd cse_matrix_naive(const MatrixXd& X, const VectorXd& y) {
  const Index n = X.rows();
  const VectorXd mean = X.colwise().mean().transpose();
  MatrixXd lambda = MatrixXd::Zero(X.cols(), X.cols());
  for (Index j = 0; j < n; ++j) {
    VectorXd m = VectorXd::Zero(X.cols());
    for (Index i = 0; i < n; ++i) {
      if (y(i) <= y(j)) m += X.row(i).transpose() - mean;
    }
    m /= static_cast<double>(n);
    lambda += m * m.transpose();
  }
  return lambda / static_cast<double>(n);
}

// Residual of `target` after projection onto the columns of `scores`, via QR.
inline VectorXd projection_residual(const MatrixXd& scores, const VectorXd& target) {
  const VectorXd coef = scores.colPivHouseholderQr().solve(target);
  return scores * coef - target;
}

// Two-sample Kolmogorov-Smirnov distance.
inline double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return best;
}

}  // namespace oracle
