#pragma once

#include "wicm/bootstrap.hpp"
#include "wicm/model.hpp"
#include "wicm/rng.hpp"
#include "wicm/weights.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wicm::sim {

enum class Family { H1, H2, H3, H4, linear_null, custom };
enum class CovarianceKind { identity, geometric };
enum class Method { WICM1, WICM2, ICM };

const char* to_string(Family f) noexcept;
const char* to_string(CovarianceKind c) noexcept;
const char* to_string(Method m) noexcept;
std::optional<Family> parse_family(const std::string& s);
std::optional<CovarianceKind> parse_covariance(const std::string& s);
std::optional<Method> parse_method(const std::string& s);

using Departure = std::function<double(const VectorXd& x)>;

/// Data-generating process  Y = linear part + a * departure(X) + eps,
/// X ~ N(0, Sigma), eps ~ N(0, 1).
struct Dgp {
  Family family = Family::linear_null;
  double a = 0.0;
  Index n = 100;
  Index p = 2;
  CovarianceKind sigma = CovarianceKind::identity;
  Departure custom_departure;  // Family::custom only

  void validate() const;
};

/// (1, ..., 1)' / sqrt(p).
VectorXd beta0(Index p);
/// First p/2 entries 1 / sqrt(p/2), the rest zero.
VectorXd beta1(Index p);
/// Coefficients of the linear part of the family (e_1 for H4, beta0 otherwise).
VectorXd linear_coefficients(const Dgp& dgp);
/// I_p, or entries 2^{-|i-j|}.
MatrixXd covariance_matrix(CovarianceKind kind, Index p);
/// The departure term, before scaling by a.
double departure(const Dgp& dgp, const VectorXd& x);

Dataset generate(const Dgp& dgp, Rng& rng);

/// Perturbation r_n S(X) with r_n = n^{-rate_exponent}; S is centered at the
/// sample before scaling.
struct LocalAlternativeSpec {
  Departure S;
  double rate_exponent = 0.5;
};

/// Y = beta0' X + n^{-alpha} (S(X) - mean S) + eps on a linear-null base.
Dataset generate_local(const Dgp& base, const LocalAlternativeSpec& alt, Rng& rng);

/// Parametric alternative class used by WICM1 for a family: the family's
/// departure terms at their true index vectors, with free linear coefficients.
DirectionalAlternative directional_class(const Dgp& dgp);

struct StudyCell {
  Dgp dgp;
  Method method = Method::WICM1;
};

struct SimStudyConfig {
  std::vector<StudyCell> grid;
  Index reps = 200;
  BootstrapConfig bootstrap{.B = 199};
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

struct SimRow {
  Family family = Family::linear_null;
  double a = 0.0;
  Index n = 0;
  Index p = 0;
  CovarianceKind sigma = CovarianceKind::identity;
  Method method = Method::WICM1;
  Index reps = 0;
  Index B = 0;
  double alpha = 0.05;
  Index rejections = 0;
  double rejection_rate = 0.0;
  std::uint64_t seed = 0;
  // Metadata; not part of the flat CSV.
  double runtime_seconds = 0.0;
  std::string alternative_label;
  std::string error;

  [[nodiscard]] bool ok() const noexcept { return error.empty(); }
};

struct SimResult {
  std::vector<SimRow> rows;
  std::uint64_t seed_echo = 0;
};

/// One replication of one cell: generate, fit the linear null, build the
/// weight, bootstrap, and report rejection at level alpha.
bool run_replication(const StudyCell& cell, const SimStudyConfig& cfg, Index replication);

/// Runs every (cell, replication) pair across cfg.workers threads. Data for a
/// replication come from a substream keyed by (master seed, DGP descriptor,
/// replication), so results do not depend on worker count or grid order. A
/// failing cell records its diagnostic in `error`; other cells are unaffected.
SimResult run_study(const SimStudyConfig& cfg);

/// One CSV row per cell:
/// family,a,n,p,sigma,method,reps,B,alpha,rejection_rate,seed
std::string emit_flat_csv(const SimResult& result);
SimResult parse_flat_csv(const std::string& text);

/// Rejection rates pivoted into methods x a-values rows and (n, p) columns,
/// one block per (family, sigma).
std::string emit_rate_table(const SimResult& result);

}  // namespace wicm::sim
