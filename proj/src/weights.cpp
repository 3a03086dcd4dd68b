#include "wicm/weights.hpp"

#include "wicm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wicm {

DirectionalAlternative make_feature_alternative(std::vector<ScalarFeature> features,
                                                std::string label) {
  if (features.empty()) throw Error(ErrorKind::InvalidArgument, "alternative needs a feature");
  DirectionalAlternative alt;
  alt.param_dim = static_cast<Index>(features.size());
  alt.label = std::move(label);
  alt.linear_in_params = true;
  alt.gradient = [features](const VectorXd& x, const VectorXd&) {
    VectorXd g(static_cast<Index>(features.size()));
    for (std::size_t k = 0; k < features.size(); ++k) g(static_cast<Index>(k)) = features[k](x);
    return g;
  };
  alt.mean = [grad = alt.gradient](const VectorXd& x, const VectorXd& theta) {
    return grad(x, theta).dot(theta);
  };
  return alt;
}

VectorXd score_span_residual(const MatrixXd& scores, const VectorXd& target) {
  try {
    const LinearLeastSquares solver(scores);
    return scores * solver.solve(target) - target;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::RankDeficient) {
      throw Error(ErrorKind::SingularGram, "score Gram matrix (1/n) sum mdot mdot' is singular");
    }
    throw;
  }
}

WeightVector directional_weight(const Dataset& data, const FittedModel& fit, const ModelSpec& spec,
                                const DirectionalAlternative& alt) {
  const FittedModel alt_fit = fit_least_squares(data, alt);
  if (!alt_fit.converged) {
    throw Error(ErrorKind::NoConvergence,
                "least-squares fit of alternative '" + alt.label + "' did not converge");
  }
  const MatrixXd scores = evaluate_jacobian(spec, data.X(), fit.beta_hat);
  return WeightVector::from_values(score_span_residual(scores, alt_fit.fitted),
                                   WeightSource::directional);
}

double mere_default_ridge(Index n) {
  const auto nn = static_cast<double>(std::max<Index>(n, 2));
  return std::log(nn) / std::sqrt(nn);
}

Index mere_dimension(const VectorXd& eigenvalues, Index n, std::optional<double> ridge) {
  const Index d = eigenvalues.size();
  if (d <= 1) return 1;
  const double c = ridge.value_or(mere_default_ridge(n));
  Index best = 1;
  double best_ratio = (eigenvalues(1) + c) / (eigenvalues(0) + c);
  for (Index k = 2; k < d; ++k) {
    const double ratio = (eigenvalues(k) + c) / (eigenvalues(k - 1) + c);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best = k;
    }
  }
  return best;
}

MatrixXd cse_candidate_matrix(const Dataset& data) {
  const Index n = data.n();
  const Index d = data.d();
  const VectorXd& y = data.y();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "cumulative slicing needs n >= 2");
  if (y.maxCoeff() == y.minCoeff()) {
    throw Error(ErrorKind::DegenerateResponse, "all responses are equal");
  }
  const Eigen::RowVectorXd xbar = data.X().colwise().mean();

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return y(a) < y(b); });

  // m(Y_j) is shared by every j in a block of tied responses.
  const double inv_n = 1.0 / static_cast<double>(n);
  MatrixXd lambda = MatrixXd::Zero(d, d);
  VectorXd cumulative = VectorXd::Zero(d);
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start;
    while (end < order.size() && y(order[end]) == y(order[start])) {
      cumulative += (data.X().row(order[end]) - xbar).transpose();
      ++end;
    }
    const VectorXd m = cumulative * inv_n;
    lambda.noalias() += static_cast<double>(end - start) * (m * m.transpose());
    start = end;
  }
  return lambda * inv_n;
}

SdrEstimate cse_directions(const Dataset& data, std::optional<double> ridge) {
  const MatrixXd lambda = cse_candidate_matrix(data);
  const Index d = lambda.rows();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(lambda);
  SdrEstimate est;
  est.eigenvalues = eig.eigenvalues().reverse();
  est.eigenvectors = eig.eigenvectors().rowwise().reverse();
  for (Index k = 0; k < d; ++k) {
    Index arg = 0;
    est.eigenvectors.col(k).cwiseAbs().maxCoeff(&arg);
    if (est.eigenvectors(arg, k) < 0.0) est.eigenvectors.col(k) *= -1.0;
  }
  est.s_hat = mere_dimension(est.eigenvalues, data.n(), ridge);
  est.directions = est.eigenvectors.leftCols(est.s_hat);
  return est;
}

namespace {

double empirical_norm(const VectorXd& v) {
  return std::sqrt(v.squaredNorm() / static_cast<double>(v.size()));
}

// Removes the components of v along the (empirically orthonormal) columns of
// basis, twice for stability.
void project_out(VectorXd& v, const std::vector<VectorXd>& basis) {
  const double inv_n = 1.0 / static_cast<double>(v.size());
  for (int pass = 0; pass < 2; ++pass) {
    for (const VectorXd& q : basis) v -= (q.dot(v) * inv_n) * q;
  }
}

}  // namespace

BasisSet gram_schmidt_basis(const MatrixXd& span_columns, const MatrixXd& candidates,
                            std::string provenance) {
  if (span_columns.rows() != candidates.rows() && span_columns.cols() > 0) {
    throw Error(ErrorKind::InvalidArgument, "span and candidate row counts differ");
  }
  std::vector<VectorXd> span_basis;
  for (Index k = 0; k < span_columns.cols(); ++k) {
    VectorXd v = span_columns.col(k);
    const double before = empirical_norm(v);
    project_out(v, span_basis);
    const double after = empirical_norm(v);
    if (before > 0.0 && after >= kBasisDropTolerance * before) span_basis.push_back(v / after);
  }

  BasisSet out;
  out.provenance = std::move(provenance);
  std::vector<VectorXd> kept_columns;
  std::vector<VectorXd> all = span_basis;
  for (Index k = 0; k < candidates.cols(); ++k) {
    VectorXd v = candidates.col(k);
    const double before = empirical_norm(v);
    project_out(v, all);
    const double after = empirical_norm(v);
    if (!(before > 0.0) || after < kBasisDropTolerance * before) continue;
    v /= after;
    all.push_back(v);
    kept_columns.push_back(v);
    out.kept.push_back(k);
  }
  out.columns.resize(candidates.rows(), static_cast<Index>(kept_columns.size()));
  for (std::size_t k = 0; k < kept_columns.size(); ++k) {
    out.columns.col(static_cast<Index>(k)) = kept_columns[k];
  }
  return out;
}

MatrixXd index_power_candidates(const MatrixXd& X, const MatrixXd& directions,
                                const std::vector<int>& powers) {
  const MatrixXd index = X * directions;
  MatrixXd out(X.rows(), index.cols() * static_cast<Index>(powers.size()));
  Index col = 0;
  for (Index i = 0; i < index.cols(); ++i) {
    for (int power : powers) out.col(col++) = index.col(i).array().pow(power);
  }
  return out;
}

WeightVector nonparametric_weight(const Dataset& data, const FittedModel& fit,
                                  const ModelSpec& spec, const BasisSet& basis) {
  const Index n = data.n();
  if (basis.columns.cols() > 0 && basis.columns.rows() != n) {
    throw Error(ErrorKind::InvalidArgument, "basis row count does not match the data");
  }
  VectorXd expansion = fit.fitted;
  if (basis.columns.cols() > 0) {
    const VectorXd coefficients =
        basis.columns.transpose() * fit.residuals / static_cast<double>(n);
    expansion += basis.columns * coefficients;
  }
  const MatrixXd scores = evaluate_jacobian(spec, data.X(), fit.beta_hat);
  return WeightVector::from_values(score_span_residual(scores, expansion),
                                   WeightSource::nonparametric);
}

WeightVector sdr_nonparametric_weight(const Dataset& data, const FittedModel& fit,
                                      const ModelSpec& spec, Index* s_hat) {
  const SdrEstimate sdr = cse_directions(data);
  if (s_hat != nullptr) *s_hat = sdr.s_hat;
  const MatrixXd scores = evaluate_jacobian(spec, data.X(), fit.beta_hat);
  const BasisSet basis = gram_schmidt_basis(
      scores, index_power_candidates(data.X(), sdr.directions), "CSE index powers 2,3,4");
  return nonparametric_weight(data, fit, spec, basis);
}

}  // namespace wicm
