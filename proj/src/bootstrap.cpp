#include "wicm/bootstrap.hpp"

#include "wicm/error.hpp"
#include "wicm/parallel.hpp"
#include "wicm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace wicm {

void BootstrapConfig::validate() const {
  if (B < 1) throw Error(ErrorKind::InvalidArgument, "bootstrap needs B >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  if (!(v_n >= 0.0) || !std::isfinite(v_n)) throw Error(ErrorKind::InvalidArgument, "v_n must be >= 0");
}

double p_value(double statistic, std::span<const double> boot_stats) {
  if (boot_stats.empty()) throw Error(ErrorKind::InvalidArgument, "no bootstrap replicates");
  const auto exceed = std::count_if(boot_stats.begin(), boot_stats.end(),
                                    [statistic](double b) { return b >= statistic; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(boot_stats.size()) + 1.0);
}

double critical_value(std::span<const double> boot_stats, double alpha) {
  if (boot_stats.empty()) throw Error(ErrorKind::InvalidArgument, "no bootstrap replicates");
  std::vector<double> sorted(boot_stats.begin(), boot_stats.end());
  std::sort(sorted.begin(), sorted.end());
  const auto B = static_cast<double>(sorted.size());
  // The small offset keeps exact products such as 0.95 * 200 from rounding up.
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * B - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

namespace {

// Refits the null model on new responses with the design held fixed.
class Refitter {
 public:
  Refitter(const MatrixXd& X, const ModelSpec& spec, const VectorXd& beta_hat)
      : X_(X), spec_(spec), beta_hat_(beta_hat) {
    if (spec.linear_in_params) {
      linear_.emplace(evaluate_jacobian(spec, X, VectorXd::Zero(spec.param_dim)));
    }
  }

  [[nodiscard]] VectorXd residuals(const VectorXd& y, Index replication) const {
    if (linear_) return y - linear_->design() * linear_->solve(y);
    FittedModel refit = fit_least_squares(X_, y, spec_, beta_hat_);
    if (!refit.converged) {
      throw Error(ErrorKind::NoConvergence, "bootstrap refit failed in replication " +
                                                std::to_string(replication) + " (gradient norm " +
                                                std::to_string(refit.gradient_norm) + ")");
    }
    return std::move(refit.residuals);
  }

 private:
  const MatrixXd& X_;
  const ModelSpec& spec_;
  VectorXd beta_hat_;
  std::optional<LinearLeastSquares> linear_;
};

VectorXd draw_smooth_errors(const VectorXd& centered, double v_n, Rng& rng) {
  const Index n = centered.size();
  std::uniform_int_distribution<Index> pick(0, n - 1);
  std::normal_distribution<double> noise(0.0, 1.0);
  VectorXd eps(n);
  for (Index i = 0; i < n; ++i) eps(i) = centered(pick(rng));
  for (Index i = 0; i < n; ++i) eps(i) += v_n * noise(rng);
  return eps;
}

void check_inputs(const Dataset& data, const FittedModel& fit) {
  if (fit.residuals.size() != data.n() || fit.fitted.size() != data.n()) {
    throw Error(ErrorKind::InvalidArgument, "fit does not belong to this dataset");
  }
}

TestOutcome assemble(double statistic, std::vector<double> boot, const BootstrapConfig& cfg,
                     TestMethod method) {
  TestOutcome out;
  out.statistic = statistic;
  out.p_value = p_value(statistic, boot);
  out.critical_value = critical_value(boot, cfg.alpha);
  out.reject = statistic >= out.critical_value;
  out.boot_stats = std::move(boot);
  out.config_echo = cfg;
  out.method = method;
  return out;
}

}  // namespace

TestOutcome smooth_residual_bootstrap(const Dataset& data, const ModelSpec& spec,
                                      const FittedModel& fit, const WeightVector& w,
                                      const BootstrapConfig& cfg, const KernelWeight& kernel) {
  cfg.validate();
  check_inputs(data, fit);
  const double statistic = wicm_statistic(w, fit.residuals, kernel);
  const VectorXd centered = fit.residuals.array() - fit.residuals.mean();
  const Refitter refitter(data.X(), spec, fit.beta_hat);

  std::vector<double> boot(static_cast<std::size_t>(cfg.B));
  parallel_for(boot.size(), cfg.workers, [&](std::size_t j) {
    Rng rng = make_stream(cfg.seed, {j});
    const VectorXd y_star = fit.fitted + draw_smooth_errors(centered, cfg.v_n, rng);
    boot[j] = wicm_statistic(w, refitter.residuals(y_star, static_cast<Index>(j)), kernel);
  });
  return assemble(statistic, std::move(boot), cfg, TestMethod::wicm);
}

MatrixXd bootstrap_process(const Dataset& data, const ModelSpec& spec, const FittedModel& fit,
                           const WeightVector& w, const BootstrapConfig& cfg,
                           std::span<const double> ts) {
  cfg.validate();
  check_inputs(data, fit);
  const VectorXd centered = fit.residuals.array() - fit.residuals.mean();
  const Refitter refitter(data.X(), spec, fit.beta_hat);
  MatrixXd out(cfg.B, static_cast<Index>(ts.size()));
  parallel_for(static_cast<std::size_t>(cfg.B), cfg.workers, [&](std::size_t j) {
    Rng rng = make_stream(cfg.seed, {j});
    const VectorXd y_star = fit.fitted + draw_smooth_errors(centered, cfg.v_n, rng);
    const VectorXd residuals = refitter.residuals(y_star, static_cast<Index>(j));
    for (std::size_t k = 0; k < ts.size(); ++k) {
      out(static_cast<Index>(j), static_cast<Index>(k)) = u_hat(w, residuals, ts[k]);
    }
  });
  return out;
}

TestOutcome wild_bootstrap_icm(const Dataset& data, const ModelSpec& spec, const FittedModel& fit,
                               const BootstrapConfig& cfg) {
  cfg.validate();
  check_inputs(data, fit);
  const IcmKernel kernel(data.X());
  const double statistic = kernel.statistic(fit.residuals);
  const Refitter refitter(data.X(), spec, fit.beta_hat);

  const double sqrt5 = std::sqrt(5.0);
  const double low = -(sqrt5 - 1.0) / 2.0;
  const double high = (sqrt5 + 1.0) / 2.0;
  const double p_low = (sqrt5 + 1.0) / (2.0 * sqrt5);

  std::vector<double> boot(static_cast<std::size_t>(cfg.B));
  parallel_for(boot.size(), cfg.workers, [&](std::size_t j) {
    Rng rng = make_stream(cfg.seed, {j});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VectorXd y_star = fit.fitted;
    for (Index i = 0; i < data.n(); ++i) {
      y_star(i) += fit.residuals(i) * (u(rng) < p_low ? low : high);
    }
    boot[j] = kernel.statistic(refitter.residuals(y_star, static_cast<Index>(j)));
  });
  return assemble(statistic, std::move(boot), cfg, TestMethod::icm);
}

}  // namespace wicm
