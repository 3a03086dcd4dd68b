#pragma once

#include "wicm/model.hpp"
#include "wicm/statistic.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace wicm {

enum class NoiseKind { gaussian };

struct BootstrapConfig {
  Index B = 500;
  double v_n = 0.2;
  NoiseKind noise = NoiseKind::gaussian;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  /// Threads used for replications; does not affect results.
  std::size_t workers = 1;

  void validate() const;
};

enum class TestMethod { wicm, icm };

struct TestOutcome {
  double statistic = 0.0;
  std::vector<double> boot_stats;  // in replication order
  double p_value = 1.0;
  double critical_value = 0.0;
  bool reject = false;
  BootstrapConfig config_echo;
  TestMethod method = TestMethod::wicm;
};

/// (1 + #{b : boot_b >= statistic}) / (B + 1).
double p_value(double statistic, std::span<const double> boot_stats);

/// The ceil((1 - alpha) B)-th order statistic (1-based) of the replicates.
double critical_value(std::span<const double> boot_stats, double alpha);

/// Smooth residual bootstrap for the weighted statistic. Replication j draws
/// errors as resampled centered residuals plus v_n * N(0, 1) noise from
/// substream (seed, j), rebuilds responses from the fitted null, refits
/// (warm-started at beta_hat) and recomputes the statistic with the fixed
/// weight vector.
TestOutcome smooth_residual_bootstrap(const Dataset& data, const ModelSpec& spec,
                                      const FittedModel& fit, const WeightVector& w,
                                      const BootstrapConfig& cfg,
                                      const KernelWeight& kernel = KernelWeight::standard_normal());

/// Bootstrap residual process u*_j(t) for every replication j (rows) and
/// every t in `ts` (columns), using the same replications as
/// smooth_residual_bootstrap.
MatrixXd bootstrap_process(const Dataset& data, const ModelSpec& spec, const FittedModel& fit,
                           const WeightVector& w, const BootstrapConfig& cfg,
                           std::span<const double> ts);

/// Wild bootstrap for the ICM baseline with Mammen two-point multipliers.
TestOutcome wild_bootstrap_icm(const Dataset& data, const ModelSpec& spec, const FittedModel& fit,
                               const BootstrapConfig& cfg);

}  // namespace wicm
