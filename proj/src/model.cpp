#include "wicm/model.hpp"

#include "wicm/error.hpp"

#include <cmath>
#include <string>

namespace wicm {

Dataset::Dataset(MatrixXd X, VectorXd y) : X_(std::move(X)), y_(std::move(y)) {
  if (X_.rows() < 1 || X_.cols() < 1) {
    throw Error(ErrorKind::InvalidArgument, "dataset needs n >= 1 and d >= 1");
  }
  if (X_.rows() != y_.size()) {
    throw Error(ErrorKind::InvalidArgument, "predictor rows (" + std::to_string(X_.rows()) +
                                                ") do not match response length (" +
                                                std::to_string(y_.size()) + ")");
  }
  if (!X_.allFinite() || !y_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "dataset contains non-finite entries");
  }
}

ModelSpec make_linear_model(Index d, bool intercept) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "linear model needs d >= 1");
  ModelSpec spec;
  spec.param_dim = intercept ? d + 1 : d;
  spec.linear_in_params = true;
  spec.label = intercept ? "linear+intercept" : "linear";
  if (intercept) {
    spec.mean = [d](const VectorXd& x, const VectorXd& beta) {
      return x.dot(beta.head(d)) + beta(d);
    };
    spec.gradient = [d](const VectorXd& x, const VectorXd&) {
      VectorXd g(d + 1);
      g.head(d) = x;
      g(d) = 1.0;
      return g;
    };
  } else {
    spec.mean = [](const VectorXd& x, const VectorXd& beta) { return x.dot(beta); };
    spec.gradient = [](const VectorXd& x, const VectorXd&) { return x; };
  }
  return spec;
}

VectorXd evaluate_mean(const ModelSpec& spec, const MatrixXd& X, const VectorXd& beta) {
  VectorXd out(X.rows());
  VectorXd row(X.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    row = X.row(i).transpose();
    out(i) = spec.mean(row, beta);
  }
  return out;
}

MatrixXd evaluate_jacobian(const ModelSpec& spec, const MatrixXd& X, const VectorXd& beta) {
  MatrixXd out(X.rows(), spec.param_dim);
  VectorXd row(X.cols());
  for (Index i = 0; i < X.rows(); ++i) {
    row = X.row(i).transpose();
    out.row(i) = spec.gradient(row, beta).transpose();
  }
  return out;
}

LinearLeastSquares::LinearLeastSquares(const MatrixXd& design) : design_(design) {
  if (design_.rows() < design_.cols()) {
    throw Error(ErrorKind::RankDeficient, "fewer observations (" + std::to_string(design_.rows()) +
                                              ") than parameters (" +
                                              std::to_string(design_.cols()) + ")");
  }
  Eigen::JacobiSVD<MatrixXd> svd(design_, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const double cutoff = kRankTolerance * (sv.size() > 0 ? sv(0) : 0.0);
  if (sv.size() == 0 || sv(0) == 0.0 || sv(sv.size() - 1) <= cutoff) {
    throw Error(ErrorKind::RankDeficient, "design matrix is not of full column rank");
  }
  pseudo_inverse_ = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

VectorXd LinearLeastSquares::solve(const VectorXd& y) const { return pseudo_inverse_ * y; }

namespace {

double gradient_norm_of(const MatrixXd& jacobian, const VectorXd& residuals) {
  return 2.0 * (jacobian.transpose() * residuals).norm();
}

FittedModel finish(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec, VectorXd beta) {
  FittedModel fit;
  fit.fitted = evaluate_mean(spec, X, beta);
  fit.residuals = y - fit.fitted;
  fit.ssr = fit.residuals.squaredNorm();
  fit.gradient_norm = gradient_norm_of(evaluate_jacobian(spec, X, beta), fit.residuals);
  fit.beta_hat = std::move(beta);
  return fit;
}

}  // namespace

FittedModel fit_least_squares(const MatrixXd& X, const VectorXd& y, const ModelSpec& spec,
                              const std::optional<VectorXd>& init) {
  const Index p = spec.param_dim;
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "model has no parameters");
  if (X.rows() != y.size()) throw Error(ErrorKind::InvalidArgument, "X and y lengths differ");
  if (X.rows() < p) {
    throw Error(ErrorKind::RankDeficient, "n < p: cannot fit " + std::to_string(p) +
                                              " parameters from " + std::to_string(X.rows()) +
                                              " observations");
  }
  VectorXd beta = init.value_or(VectorXd::Zero(p));
  if (beta.size() != p) throw Error(ErrorKind::InvalidArgument, "init has wrong dimension");

  if (spec.linear_in_params) {
    const LinearLeastSquares solver(evaluate_jacobian(spec, X, VectorXd::Zero(p)));
    FittedModel fit = finish(X, y, spec, solver.solve(y));
    fit.converged = true;
    fit.iterations = 1;
    return fit;
  }

  // Damped Gauss-Newton with step halving.
  VectorXd residuals = y - evaluate_mean(spec, X, beta);
  double ssr = residuals.squaredNorm();
  int iterations = 0;
  bool converged = false;
  for (; iterations < kMaxIterations; ++iterations) {
    const MatrixXd jacobian = evaluate_jacobian(spec, X, beta);
    const double gnorm = gradient_norm_of(jacobian, residuals);
    if (gnorm <= kSolverTolerance * (1.0 + ssr)) {
      converged = true;
      break;
    }
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(jacobian);
    cod.setThreshold(kRankTolerance);
    const VectorXd step = cod.solve(residuals);

    bool improved = false;
    double scale = 1.0;
    for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
      const VectorXd candidate = beta + scale * step;
      const VectorXd r = y - evaluate_mean(spec, X, candidate);
      const double candidate_ssr = r.squaredNorm();
      if (std::isfinite(candidate_ssr) && candidate_ssr < ssr) {
        beta = candidate;
        residuals = r;
        ssr = candidate_ssr;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  FittedModel fit = finish(X, y, spec, std::move(beta));
  fit.iterations = iterations;
  fit.converged = converged || fit.gradient_norm <= kSolverTolerance * (1.0 + fit.ssr);
  return fit;
}

FittedModel fit_least_squares(const Dataset& data, const ModelSpec& spec,
                              const std::optional<VectorXd>& init) {
  return fit_least_squares(data.X(), data.y(), spec, init);
}

namespace {

VectorXd standardize_column(const VectorXd& v, const std::string& name) {
  const Index n = v.size();
  if (n < 2) throw Error(ErrorKind::ZeroVariance, "column " + name + " has fewer than two rows");
  const double mean = v.mean();
  const VectorXd centered = v.array() - mean;
  const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::ZeroVariance, "column " + name + " is constant");
  return centered / sd;
}

}  // namespace

Dataset standardize(const Dataset& data) {
  MatrixXd X(data.n(), data.d());
  for (Index k = 0; k < data.d(); ++k) {
    X.col(k) = standardize_column(data.X().col(k), "x" + std::to_string(k + 1));
  }
  return Dataset(std::move(X), standardize_column(data.y(), "response"));
}

}  // namespace wicm
