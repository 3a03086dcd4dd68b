#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>

namespace wicm {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// n observations of a d-dimensional predictor row and a scalar response.
class Dataset {
 public:
  Dataset(MatrixXd X, VectorXd y);

  [[nodiscard]] const MatrixXd& X() const noexcept { return X_; }
  [[nodiscard]] const VectorXd& y() const noexcept { return y_; }
  [[nodiscard]] Index n() const noexcept { return X_.rows(); }
  [[nodiscard]] Index d() const noexcept { return X_.cols(); }

 private:
  MatrixXd X_;
  VectorXd y_;
};

using MeanFn = std::function<double(const VectorXd& x, const VectorXd& beta)>;
using GradientFn = std::function<VectorXd(const VectorXd& x, const VectorXd& beta)>;

/// A parametric mean-function family m(x, beta) with its gradient in beta.
///
/// When `linear_in_params` is set, m(x, beta) = gradient(x, .)' beta and the
/// gradient does not depend on beta; fitting then short-circuits to a direct
/// orthogonal solve.
struct ModelSpec {
  MeanFn mean;
  GradientFn gradient;
  Index param_dim = 0;
  std::string label;
  bool linear_in_params = false;
};

struct FittedModel {
  VectorXd beta_hat;
  VectorXd fitted;
  VectorXd residuals;
  double ssr = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// m(x, beta) = beta' x, plus beta_{d+1} when `intercept` is set.
ModelSpec make_linear_model(Index d, bool intercept);

/// Rows of the mean function / Jacobian evaluated at every sample point.
VectorXd evaluate_mean(const ModelSpec& spec, const MatrixXd& X, const VectorXd& beta);
MatrixXd evaluate_jacobian(const ModelSpec& spec, const MatrixXd& X, const VectorXd& beta);

/// Least-squares solver bound to a fixed design matrix. Singular values below
/// 1e-10 times the largest one count as zero; any such value makes the design
/// rank deficient.
class LinearLeastSquares {
 public:
  explicit LinearLeastSquares(const MatrixXd& design);

  [[nodiscard]] VectorXd solve(const VectorXd& y) const;
  [[nodiscard]] const MatrixXd& design() const noexcept { return design_; }

 private:
  MatrixXd design_;
  MatrixXd pseudo_inverse_;
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kSolverTolerance = 1e-8;
inline constexpr int kMaxIterations = 200;

/// Minimizes sum_i {y_i - m(X_i, beta)}^2.
///
/// Specs that are linear in their parameters are solved directly. Other specs
/// run damped Gauss-Newton with step halving from `init` (zero by default)
/// until ||grad SSR|| <= 1e-8 (1 + SSR) or 200 iterations; on hitting the cap
/// the best iterate is returned with `converged == false`.
FittedModel fit_least_squares(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec,
                              const std::optional<VectorXd>& init = std::nullopt);
FittedModel fit_least_squares(const Dataset& data, const ModelSpec& spec,
                              const std::optional<VectorXd>& init = std::nullopt);

/// Centers every predictor column and the response and scales them to unit
/// sample standard deviation (divisor n - 1).
Dataset standardize(const Dataset& data);

}  // namespace wicm
