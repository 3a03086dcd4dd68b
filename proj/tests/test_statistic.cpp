#include "oracles.hpp"

#include "wicm/error.hpp"
#include "wicm/model.hpp"
#include "wicm/quadrature.hpp"
#include "wicm/rng.hpp"
#include "wicm/statistic.hpp"

#include <gtest/gtest.h>

using namespace wicm;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

VectorXd normals(Index n, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

MatrixXd normal_matrix(Index n, Index d, Rng& rng) {
  std::normal_distribution<double> normal;
  MatrixXd X(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) X(i, k) = normal(rng);
  return X;
}

}  // namespace

TEST(Quadrature, LibraryRuleMatchesGolubWelsch) {
  for (std::size_t order : {5u, 20u, 64u}) {
    const QuadratureRule rule = gauss_hermite_normal(order);
    const oracle::Rule ref = oracle::golub_welsch_normal(static_cast<Index>(order));
    ASSERT_EQ(rule.nodes.size(), order);
    // both sorted ascending
    for (std::size_t k = 0; k < order; ++k) {
      EXPECT_NEAR(rule.nodes[k], ref.nodes(static_cast<Index>(k)), 1e-9 * (1.0 + std::abs(rule.nodes[k])));
      EXPECT_NEAR(rule.weights[k], ref.weights(static_cast<Index>(k)), 1e-12 + 1e-8 * ref.weights(static_cast<Index>(k)));
    }
  }
}

TEST(Quadrature, NormalMoments) {
  const QuadratureRule& rule = gauss_hermite_normal_64();
  EXPECT_NEAR(integrate_normal(rule, [](double) { return 1.0; }), 1.0, 1e-13);
  EXPECT_NEAR(integrate_normal(rule, [](double t) { return t * t; }), 1.0, 1e-12);
  EXPECT_NEAR(integrate_normal(rule, [](double t) { return t * t * t * t; }), 3.0, 1e-11);
}

TEST(MPhi, GaussianClosedForm) {
  EXPECT_EQ(m_phi_gaussian(0.0), 1.0);
  const oracle::Rule ref = oracle::golub_welsch_normal(64);
  EXPECT_NEAR(m_phi_gaussian(1.7), oracle::integrate_normal(ref, [](double t) { return std::cos(1.7 * t); }), 1e-10);
  Rng rng(3);
  for (double u : normals(20, rng, 2.0)) EXPECT_EQ(m_phi_gaussian(u), m_phi_gaussian(-u));
}

TEST(MPhi, NumericTransformOfDensity) {
  const KernelWeight gauss = KernelWeight::from_density(
      [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); });
  for (double u : {0.0, 0.3, 1.7, 2.5}) EXPECT_NEAR(gauss.m_phi(u), std::exp(-0.5 * u * u), 1e-10);
  // N(0, 1/4): cosine transform exp(-u^2 / 8)
  const KernelWeight narrow = KernelWeight::from_density(
      [](double t) { return 2.0 * std::exp(-2.0 * t * t) / std::sqrt(2.0 * std::numbers::pi); });
  for (double u : {0.0, 1.0, 2.0}) EXPECT_NEAR(narrow.m_phi(u), std::exp(-u * u / 8.0), 1e-9);
  EXPECT_EQ(narrow.m_phi(1.3), narrow.m_phi(-1.3));
}

TEST(WeightVector, Centering) {
  const WeightVector w = WeightVector::from_values(vec({1, 2, 6}));
  EXPECT_NEAR(w.centered.sum(), 0.0, 1e-14);
  EXPECT_EQ(w.values, vec({1, 2, 6}));
  EXPECT_NEAR(w.centered(2), 3.0, 1e-15);
}

TEST(UHat, VanishesAtZeroAndForSingleObservation) {
  Rng rng(9);
  const WeightVector w = WeightVector::from_values(normals(30, rng));
  EXPECT_NEAR(u_hat(w, normals(30, rng), 0.0), 0.0, 1e-13);
  EXPECT_EQ(u_hat(WeightVector::from_values(vec({4.2})), vec({0.3}), 1.1), 0.0);
  const VectorXd g = normals(30, rng);
  const VectorXd e = normals(30, rng);
  EXPECT_NEAR(u_hat(WeightVector::from_values(g), e, 0.8), oracle::process_value(g, e, 0.8), 1e-13);
}

TEST(Wicm, HandInstance) {
  const WeightVector w = WeightVector::from_values(vec({0, 2}));
  EXPECT_NEAR(wicm_statistic(w, vec({0, 1})), 1.0 - std::exp(-0.5), 1e-15);
}

TEST(Wicm, DegenerateWeightsOrResiduals) {
  Rng rng(1);
  EXPECT_NEAR(wicm_statistic(WeightVector::from_values(VectorXd::Constant(10, 3.0)), normals(10, rng)), 0.0, 1e-15);
  EXPECT_NEAR(wicm_statistic(WeightVector::from_values(normals(10, rng)), VectorXd::Constant(10, 0.4)), 0.0, 1e-14);
}

TEST(Wicm, MatchesDoubleSumAndQuadrature) {
  Rng rng(77);
  const oracle::Rule rule = oracle::golub_welsch_normal(64);
  for (int trial = 0; trial < 25; ++trial) {
    const Index n = 2 + trial;
    const VectorXd g = normals(n, rng);
    const VectorXd e = normals(n, rng, 0.5);
    const double value = wicm_statistic(WeightVector::from_values(g), e);
    EXPECT_NEAR(value, oracle::wicm_double_sum(g, e), 1e-12 * (1.0 + value));
    const double quad = oracle::integrate_normal(rule, [&](double t) {
      const double u = oracle::process_value(g, e, t);
      return u * u;
    });
    EXPECT_NEAR(value, quad, 1e-8 * (1.0 + value));
    const double complex_form = oracle::integrate_normal(rule, [&](double t) { return oracle::complex_process_sq(g, e, t); });
    EXPECT_NEAR(value, complex_form, 1e-8 * (1.0 + value));
  }
}

TEST(Wicm, GeneralKernelPathAgreesWithGaussianPath) {
  Rng rng(12);
  const VectorXd g = normals(25, rng);
  const VectorXd e = normals(25, rng);
  KernelWeight slow;
  slow.m_phi = m_phi_gaussian;
  const WeightVector w = WeightVector::from_values(g);
  EXPECT_NEAR(wicm_statistic(w, e, slow), wicm_statistic(w, e), 1e-12);
}

TEST(Wicm, ShiftScaleAndSign) {
  Rng rng(31);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 3 + trial % 20;
    const VectorXd g = normals(n, rng);
    const VectorXd e = normals(n, rng);
    const double c = unif(rng);
    const double base = wicm_statistic(WeightVector::from_values(g), e);
    EXPECT_GE(base, -1e-12);
    EXPECT_NEAR(wicm_statistic(WeightVector::from_values((g.array() + c).matrix()), e), base, 1e-10);
    EXPECT_NEAR(wicm_statistic(WeightVector::from_values(c * g), e), c * c * base, 1e-10 * (1.0 + c * c * base));
    // residual shifts cancel in the kernel differences
    EXPECT_NEAR(wicm_statistic(WeightVector::from_values(g), (e.array() + c).matrix()), base, 1e-10);
  }
}

TEST(Icm, SmallCases) {
  EXPECT_NEAR(icm_statistic(MatrixXd::Constant(1, 3, 0.7), vec({1.5})), 2.25, 1e-15);
  const VectorXd e = vec({1, -2, 0.5, 3});
  EXPECT_NEAR(icm_statistic(MatrixXd::Constant(4, 2, 1.1), e), e.sum() * e.sum() / 4.0, 1e-13);
}

TEST(Icm, MatchesDoubleSumAndCachedKernel) {
  Rng rng(8);
  const MatrixXd X = normal_matrix(30, 3, rng);
  const VectorXd e = normals(30, rng);
  const double value = icm_statistic(X, e);
  EXPECT_NEAR(value, oracle::icm_double_sum(X, e), 1e-12 * (1.0 + std::abs(value)));
  EXPECT_NEAR(IcmKernel(X).statistic(e), value, 1e-12 * (1.0 + std::abs(value)));
}

TEST(Icm, MonteCarloIntegralForm) {
  Rng rng(101);
  const MatrixXd X = normal_matrix(4, 2, rng);
  const VectorXd e = normals(4, rng);
  const auto [mean, se] = oracle::icm_monte_carlo(X, e, 1000000, 55);
  EXPECT_LE(std::abs(icm_statistic(X, e) - mean), 3.0 * se);
}

namespace {

struct CovarianceFixture {
  Dataset data;
  ModelSpec spec;
  FittedModel fit;
  WeightVector w;
};

CovarianceFixture covariance_fixture(std::uint64_t seed) {
  Rng rng(seed);
  const MatrixXd X = normal_matrix(80, 3, rng);
  const VectorXd y = X.col(0) + 0.5 * X.col(1) + normals(80, rng);
  Dataset data(X, y);
  ModelSpec spec = make_linear_model(3, true);
  FittedModel fit = fit_least_squares(data, spec);
  VectorXd g(80);
  for (Index i = 0; i < 80; ++i) g(i) = X(i, 0) + std::cos(X(i, 1)) + X(i, 2) * X(i, 2);
  return {std::move(data), std::move(spec), std::move(fit), WeightVector::from_values(g)};
}

// (1/n) sum_i a_i(s) a_i(t) with
// a_i(t) = g0_i {h_t(e_i) - mean h_t} + t W(t)' G^{-1} mdot_i e_i.
double gram_covariance(const CovarianceFixture& f, double s, double t) {
  const Index n = f.data.n();
  MatrixXd mdot(n, 4);
  mdot << f.data.X(), VectorXd::Ones(n);
  const MatrixXd G = mdot.transpose() * mdot / static_cast<double>(n);
  const VectorXd& e = f.fit.residuals;
  const VectorXd& g0 = f.w.centered;
  auto a = [&](double u) {
    VectorXd h(n);
    VectorXd d(n);
    for (Index i = 0; i < n; ++i) {
      h(i) = std::cos(u * e(i)) + std::sin(u * e(i));
      d(i) = std::sin(u * e(i)) - std::cos(u * e(i));
    }
    const VectorXd W = mdot.transpose() * g0.cwiseProduct(d) / static_cast<double>(n);
    const VectorXd coef = G.ldlt().solve(W);
    VectorXd out(n);
    for (Index i = 0; i < n; ++i) out(i) = g0(i) * (h(i) - h.mean()) + u * coef.dot(mdot.row(i).transpose()) * e(i);
    return out;
  };
  return a(s).dot(a(t)) / static_cast<double>(n);
}

}  // namespace

TEST(PlugInCovariance, MatchesGramOracle) {
  const CovarianceFixture f = covariance_fixture(4);
  for (auto [s, t] : {std::pair{0.5, 0.5}, {0.5, 1.0}, {1.0, 2.0}, {-0.7, 1.3}}) {
    const double k = plug_in_covariance(f.data, f.fit, f.spec, f.w, s, t);
    EXPECT_NEAR(k, gram_covariance(f, s, t), 1e-10 * (1.0 + std::abs(k)));
  }
}

TEST(PlugInCovariance, ZeroSymmetricAndPsd) {
  const CovarianceFixture f = covariance_fixture(5);
  EXPECT_NEAR(plug_in_covariance(f.data, f.fit, f.spec, f.w, 0.0, 0.0), 0.0, 1e-14);
  EXPECT_NEAR(plug_in_covariance(f.data, f.fit, f.spec, f.w, 0.3, 1.9),
              plug_in_covariance(f.data, f.fit, f.spec, f.w, 1.9, 0.3), 1e-13);
  const std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
  MatrixXd K(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      K(static_cast<Index>(i), static_cast<Index>(j)) = plug_in_covariance(f.data, f.fit, f.spec, f.w, grid[i], grid[j]);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixXd>(K).eigenvalues().minCoeff(), -1e-8);
}

TEST(PlugInCovariance, SingularSigma) {
  MatrixXd X(5, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10;
  const Dataset data(X, vec({1, 2, 3, 4, 6}));
  const ModelSpec spec = make_linear_model(2, false);
  FittedModel fit;
  fit.beta_hat = vec({0.1, 0.2});
  fit.fitted = X * fit.beta_hat;
  fit.residuals = data.y() - fit.fitted;
  try {
    plug_in_covariance(data, fit, spec, WeightVector::from_values(vec({1, 0, 2, 0, 1})), 1.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularSigma);
  }
}

TEST(AlternativeDrift, Definitions) {
  Rng rng(13);
  const Index n = 40;
  const VectorXd g = normals(n, rng);
  const VectorXd eps = normals(n, rng);
  const VectorXd S = normals(n, rng);
  const WeightVector w = WeightVector::from_values(g);
  for (DriftKind kind : {DriftKind::fixed, DriftKind::local}) {
    EXPECT_EQ(alternative_drift(w, eps, VectorXd::Zero(n), 0.9, kind), 0.0);
  }
  EXPECT_NEAR(alternative_drift(w, eps, S, 0.0, DriftKind::local), w.centered.cwiseProduct(S).mean(), 1e-14);

  const double t = 1.3;
  const VectorXd g0 = oracle::centered(g);
  double direct = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double e = eps(i) + S(i);
    direct += g0(i) * ((std::cos(t * e) + std::sin(t * e)) - (std::cos(t * eps(i)) + std::sin(t * eps(i))));
  }
  EXPECT_NEAR(alternative_drift(w, eps, S, t, DriftKind::fixed), direct / n, 1e-14);
}
