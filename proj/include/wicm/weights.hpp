#pragma once

#include "wicm/model.hpp"
#include "wicm/statistic.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wicm {

/// Parametric alternative family s(x, theta). Shares the ModelSpec layout:
/// `mean` is s, `gradient` is ds/dtheta and `param_dim` is q.
using DirectionalAlternative = ModelSpec;

using ScalarFeature = std::function<double(const VectorXd& x)>;

/// s(x, theta) = sum_k theta_k h_k(x) for fixed feature functions h_k.
DirectionalAlternative make_feature_alternative(std::vector<ScalarFeature> features,
                                                std::string label);

/// g(X_i) = mdot_i' G^{-1} {(1/n) sum_j mdot_j target_j} - target_i, i.e. the
/// residual of `target` after least-squares projection onto the score span.
/// Throws SingularGram if the score Gram matrix is singular.
VectorXd score_span_residual(const MatrixXd& scores, const VectorXd& target);

/// Weight for a given parametric alternative: fits theta by least squares of
/// the observed responses on s(X, theta) and projects s(X, theta_hat).
WeightVector directional_weight(const Dataset& data, const FittedModel& fit, const ModelSpec& spec,
                                const DirectionalAlternative& alt);

/// Sufficient-dimension-reduction estimate of the central subspace.
struct SdrEstimate {
  MatrixXd directions;    // d x s_hat, orthonormal columns
  VectorXd eigenvalues;   // all d eigenvalues, descending
  MatrixXd eigenvectors;  // d x d, columns matching `eigenvalues`
  Index s_hat = 0;
};

/// Default MERE ridge log(n) / sqrt(n).
double mere_default_ridge(Index n);

/// argmin over 1 <= k <= d-1 of (lambda_{k+1} + c) / (lambda_k + c); ties go
/// to the smallest k. Returns 1 when d == 1.
Index mere_dimension(const VectorXd& eigenvalues, Index n,
                     std::optional<double> ridge = std::nullopt);

/// Cumulative slicing candidate matrix
///   (1/n) sum_j m(Y_j) m(Y_j)',  m(y) = (1/n) sum_i (X_i - Xbar) 1{Y_i <= y}.
MatrixXd cse_candidate_matrix(const Dataset& data);

/// Eigendecomposition of the cumulative slicing matrix with MERE dimension
/// selection. Throws DegenerateResponse when every response is equal.
SdrEstimate cse_directions(const Dataset& data, std::optional<double> ridge = std::nullopt);

struct BasisSet {
  MatrixXd columns;         // n x l, unit empirical norm, mutually orthogonal
  std::string provenance;
  std::vector<Index> kept;  // candidate indices that survived
};

inline constexpr double kBasisDropTolerance = 1e-8;

/// Gram-Schmidt in the empirical inner product <u, v> = (1/n) sum u_i v_i.
/// Candidates are orthogonalized against the span columns and each other; a
/// candidate whose residual norm falls below 1e-8 of its original norm is
/// dropped.
BasisSet gram_schmidt_basis(const MatrixXd& span_columns, const MatrixXd& candidates,
                            std::string provenance = {});

/// Candidates (B_i' x)^k for every direction column and every requested power,
/// ordered direction-major.
MatrixXd index_power_candidates(const MatrixXd& X, const MatrixXd& directions,
                                const std::vector<int>& powers = {2, 3, 4});

/// Weight for unspecified alternatives from a truncated expansion of the
/// regression function in `basis`.
WeightVector nonparametric_weight(const Dataset& data, const FittedModel& fit,
                                  const ModelSpec& spec, const BasisSet& basis);

/// CSE + MERE directions, index-power basis and nonparametric weight in one
/// call. `s_hat` receives the selected structural dimension.
WeightVector sdr_nonparametric_weight(const Dataset& data, const FittedModel& fit,
                                      const ModelSpec& spec, Index* s_hat = nullptr);

}  // namespace wicm
