#pragma once

#include "wicm/model.hpp"

#include <functional>
#include <string>

namespace wicm {

enum class WeightSource { directional, nonparametric, user };

const char* to_string(WeightSource source) noexcept;

/// Weight function g evaluated at the sample points, together with its
/// centered version g(X_i) - mean(g).
struct WeightVector {
  VectorXd values;
  VectorXd centered;
  WeightSource source = WeightSource::user;

  static WeightVector from_values(VectorXd values, WeightSource source = WeightSource::user);
};

/// Cosine transform M(u) = int cos(u t) phi(t) dt of an even weight density phi.
struct KernelWeight {
  std::function<double(double)> m_phi;
  bool fourth_moment_finite = true;
  bool gaussian = false;

  /// phi = standard normal density, M(u) = exp(-u^2 / 2).
  static KernelWeight standard_normal();

  /// Numeric cosine transform of an arbitrary even density via 64-node
  /// Gauss-Hermite quadrature of cos(u t) phi(t) / N(t; 0, 1).
  static KernelWeight from_density(std::function<double(double)> phi);
};

double m_phi_gaussian(double u) noexcept;

/// Residual process (1/sqrt n) sum_i g0_i {cos(t e_i) + sin(t e_i)}.
double u_hat(const WeightVector& w, const VectorXd& residuals, double t);

/// (1/n) sum_{j,k} g0_j g0_k M(e_j - e_k), the closed form of
/// int |u_hat(t)|^2 phi(t) dt.
double wicm_statistic(const WeightVector& w, const VectorXd& residuals,
                      const KernelWeight& kernel = KernelWeight::standard_normal());

/// (1/n) sum_{j,k} e_j e_k exp(-||X_j - X_k||^2 / 2).
double icm_statistic(const MatrixXd& X, const VectorXd& residuals);

/// ICM kernel matrix cached for a fixed design, used by bootstrap loops where
/// only the residuals change.
class IcmKernel {
 public:
  explicit IcmKernel(const MatrixXd& X);
  [[nodiscard]] double statistic(const VectorXd& residuals) const;

 private:
  MatrixXd kernel_;
};

/// Sample plug-in of the null covariance K_n(s, t) of the weighted residual
/// process: expectations become sample averages, errors become residuals,
/// beta_0 becomes beta_hat and Sigma becomes (1/n) sum mdot mdot'.
double plug_in_covariance(const Dataset& data, const FittedModel& fit, const ModelSpec& spec,
                          const WeightVector& w, double s, double t);

enum class DriftKind { fixed, local };

/// Sample analogues of the alternative drift functionals.
///   fixed: mean g0 {cos(t e) - cos(t eps) + sin(t e) - sin(t eps)},  e = eps + S
///   local: mean g0 S {cos(t eps) - sin(t eps)}
double alternative_drift(const WeightVector& w, const VectorXd& residuals_null,
                         const VectorXd& s_values, double t, DriftKind kind);

}  // namespace wicm
