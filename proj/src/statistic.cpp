#include "wicm/statistic.hpp"

#include "wicm/error.hpp"
#include "wicm/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace wicm {

const char* to_string(WeightSource source) noexcept {
  switch (source) {
    case WeightSource::directional: return "directional";
    case WeightSource::nonparametric: return "nonparametric";
    case WeightSource::user: return "user";
  }
  return "user";
}

WeightVector WeightVector::from_values(VectorXd values, WeightSource source) {
  if (values.size() < 1) throw Error(ErrorKind::InvalidArgument, "empty weight vector");
  WeightVector w;
  w.centered = values.array() - values.mean();
  w.values = std::move(values);
  w.source = source;
  return w;
}

double m_phi_gaussian(double u) noexcept { return std::exp(-0.5 * u * u); }

KernelWeight KernelWeight::standard_normal() {
  KernelWeight k;
  k.m_phi = m_phi_gaussian;
  k.gaussian = true;
  return k;
}

KernelWeight KernelWeight::from_density(std::function<double(double)> phi) {
  KernelWeight k;
  k.m_phi = [phi = std::move(phi)](double u) {
    const double inv_norm = std::sqrt(2.0 * std::numbers::pi);
    return integrate_normal(gauss_hermite_normal_64(), [&](double t) {
      return std::cos(u * t) * phi(t) * inv_norm * std::exp(0.5 * t * t);
    });
  };
  return k;
}

namespace {

void require_same_length(const WeightVector& w, const VectorXd& residuals) {
  if (w.centered.size() != residuals.size()) {
    throw Error(ErrorKind::InvalidArgument, "weight and residual lengths differ");
  }
}

}  // namespace

double u_hat(const WeightVector& w, const VectorXd& residuals, double t) {
  require_same_length(w, residuals);
  double acc = 0.0;
  for (Index i = 0; i < residuals.size(); ++i) {
    const double arg = t * residuals(i);
    acc += w.centered(i) * (std::cos(arg) + std::sin(arg));
  }
  return acc / std::sqrt(static_cast<double>(residuals.size()));
}

double wicm_statistic(const WeightVector& w, const VectorXd& residuals, const KernelWeight& kernel) {
  require_same_length(w, residuals);
  const Index n = residuals.size();
  const double* g = w.centered.data();
  const double* e = residuals.data();
  // Symmetric double sum, upper triangle in row-major order.
  double diagonal = 0.0;
  double off = 0.0;
  if (kernel.gaussian) {
    for (Index j = 0; j < n; ++j) {
      diagonal += g[j] * g[j];
      double row = 0.0;
      for (Index k = j + 1; k < n; ++k) {
        const double diff = e[j] - e[k];
        row += g[k] * std::exp(-0.5 * diff * diff);
      }
      off += g[j] * row;
    }
  } else {
    const double m0 = kernel.m_phi(0.0);
    for (Index j = 0; j < n; ++j) {
      diagonal += g[j] * g[j] * m0;
      double row = 0.0;
      for (Index k = j + 1; k < n; ++k) row += g[k] * kernel.m_phi(e[j] - e[k]);
      off += g[j] * row;
    }
  }
  return (diagonal + 2.0 * off) / static_cast<double>(n);
}

IcmKernel::IcmKernel(const MatrixXd& X) : kernel_(X.rows(), X.rows()) {
  const Index n = X.rows();
  for (Index j = 0; j < n; ++j) {
    kernel_(j, j) = 1.0;
    for (Index k = j + 1; k < n; ++k) {
      const double value = std::exp(-0.5 * (X.row(j) - X.row(k)).squaredNorm());
      kernel_(j, k) = value;
      kernel_(k, j) = value;
    }
  }
}

double IcmKernel::statistic(const VectorXd& residuals) const {
  if (residuals.size() != kernel_.rows()) {
    throw Error(ErrorKind::InvalidArgument, "residual length does not match design");
  }
  return residuals.dot(kernel_ * residuals) / static_cast<double>(residuals.size());
}

double icm_statistic(const MatrixXd& X, const VectorXd& residuals) {
  if (X.rows() != residuals.size()) {
    throw Error(ErrorKind::InvalidArgument, "residual length does not match design");
  }
  const Index n = X.rows();
  double acc = 0.0;
  for (Index j = 0; j < n; ++j) {
    double row = 0.0;
    for (Index k = 0; k < n; ++k) {
      row += residuals(k) * std::exp(-0.5 * (X.row(j) - X.row(k)).squaredNorm());
    }
    acc += residuals(j) * row;
  }
  return acc / static_cast<double>(n);
}

namespace {

struct ProcessTerms {
  VectorXd centered_transform;  // h_t(e_i) - mean h_t(e)
  VectorXd w;                   // (1/n) sum g0 mdot (sin - cos)
  VectorXd v;                   // (1/n) sum g0 (h_t - mean h_t) e mdot
};

ProcessTerms process_terms(const VectorXd& g0, const VectorXd& e, const MatrixXd& mdot, double t) {
  const Index n = e.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  ProcessTerms terms;
  const VectorXd c = (t * e).array().cos();
  const VectorXd s = (t * e).array().sin();
  terms.centered_transform = (c + s).array() - (c + s).mean();
  terms.w = mdot.transpose() * g0.cwiseProduct(s - c) * inv_n;
  terms.v = mdot.transpose() *
            g0.cwiseProduct(terms.centered_transform).cwiseProduct(e) * inv_n;
  return terms;
}

}  // namespace

double plug_in_covariance(const Dataset& data, const FittedModel& fit, const ModelSpec& spec,
                          const WeightVector& w, double s, double t) {
  const Index n = data.n();
  if (fit.residuals.size() != n || w.centered.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "fit, weight and data sizes differ");
  }
  if (n <= spec.param_dim) {
    throw Error(ErrorKind::InvalidArgument, "plug-in covariance needs n > p");
  }
  const MatrixXd mdot = evaluate_jacobian(spec, data.X(), fit.beta_hat);
  const double inv_n = 1.0 / static_cast<double>(n);
  const MatrixXd sigma = mdot.transpose() * mdot * inv_n;

  Eigen::JacobiSVD<MatrixXd> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const VectorXd& sv = svd.singularValues();
  if (sv(0) == 0.0 || sv(sv.size() - 1) <= kRankTolerance * sv(0)) {
    throw Error(ErrorKind::SingularSigma, "empirical score Gram matrix is singular");
  }
  const MatrixXd sigma_inv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();

  const VectorXd& e = fit.residuals;
  const VectorXd& g0 = w.centered;
  const ProcessTerms at_s = process_terms(g0, e, mdot, s);
  const ProcessTerms at_t = process_terms(g0, e, mdot, t);

  const double term1 =
      g0.cwiseAbs2().cwiseProduct(at_s.centered_transform).dot(at_t.centered_transform) * inv_n;
  const double term2 = at_s.w.dot(sigma_inv * at_t.v) * s;
  const double term3 = at_t.w.dot(sigma_inv * at_s.v) * t;
  const MatrixXd omega = mdot.transpose() * e.cwiseAbs2().asDiagonal() * mdot * inv_n;
  const double term4 = at_s.w.dot(sigma_inv * omega * sigma_inv * at_t.w) * s * t;
  return term1 + term2 + term3 + term4;
}

double alternative_drift(const WeightVector& w, const VectorXd& residuals_null,
                         const VectorXd& s_values, double t, DriftKind kind) {
  const Index n = residuals_null.size();
  if (w.centered.size() != n || s_values.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "drift inputs have different lengths");
  }
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double eps = residuals_null(i);
    if (kind == DriftKind::fixed) {
      const double e = eps + s_values(i);
      acc += w.centered(i) *
             (std::cos(t * e) - std::cos(t * eps) + std::sin(t * e) - std::sin(t * eps));
    } else {
      acc += w.centered(i) * s_values(i) * (std::cos(t * eps) - std::sin(t * eps));
    }
  }
  return acc / static_cast<double>(n);
}

}  // namespace wicm
