#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "latentflow/gp.hpp"
#include "latentflow/rng.hpp"

namespace lf = latentflow;

namespace {

lf::GpHyper hyper(int d, double omega, double logVar, double mean) {
  lf::GpHyper h;
  h.omega = Eigen::VectorXd::Constant(d, omega);
  h.logVariance = logVar;
  h.mean = mean;
  return h;
}

}  // namespace

TEST(Kernel, ScalarOracle) {
  EXPECT_NEAR(lf::kernel(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0), hyper(2, 0.0, 0.0, 0.0)), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(lf::squaredExponential(Eigen::Vector2f(1, 0), Eigen::Vector2f(0, 0), Eigen::Vector2f(0, 0), 1.0f),
              std::exp(-1.0f), 1e-6f);
}

TEST(Evidence, GradientMatchesFiniteDifferences) {
  lf::Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd X = rng.normalMatrix(5, 3);
    const Eigen::VectorXd Y = rng.normalVector(5);
    lf::GpHyper h = hyper(3, 0.0, rng.uniform(-1, 1), rng.uniform(-1, 1));
    for (int j = 0; j < 3; ++j) h.omega(j) = rng.uniform(-1, 1);
    const auto ev = lf::logMarginalLikelihood(h, X, Y);
    for (int k = 0; k < 5; ++k) {
      const double e = 1e-6;
      lf::GpHyper a = h, b = h;
      auto bump = [&](lf::GpHyper& g, double v) {
        if (k < 3) g.omega(k) += v;
        else if (k == 3) g.logVariance += v;
        else g.mean += v;
      };
      bump(a, e);
      bump(b, -e);
      const double fd = (lf::logMarginalLikelihood(a, X, Y).value - lf::logMarginalLikelihood(b, X, Y).value) / (2 * e);
      EXPECT_LT(std::abs(fd - ev.gradient(k)) / std::max({1e-8, std::abs(fd), std::abs(ev.gradient(k))}), 1e-5);
    }
  }
}

TEST(Evidence, DuplicatedInputsStayFinite) {
  Eigen::MatrixXd X(3, 1);
  X << 0.0, 0.0, 1.0;
  const auto ev = lf::logMarginalLikelihood(hyper(1, 0.0, 0.0, 0.0), X, Eigen::Vector3d(1.0, -1.0, 0.5));
  EXPECT_TRUE(std::isfinite(ev.value));
  EXPECT_TRUE(ev.gradient.allFinite());
}

TEST(GpModel, TwoPointHandAlgebra) {
  Eigen::MatrixXd X(2, 1);
  X << 0.0, 1.0;
  const Eigen::Vector2d Y(1.0, 2.0);
  const auto h = hyper(1, 0.0, 0.0, 0.5);
  const lf::GpModel gp(X, Y, h, false);
  const double j = h.jitter, c = std::exp(-1.0), k = std::exp(-0.25);
  const double det = (1 + j) * (1 + j) - c * c;
  Eigen::Matrix2d Kinv;
  Kinv << 1 + j, -c, -c, 1 + j;
  Kinv /= det;
  const Eigen::Vector2d ks(k, k);
  const double mean = 0.5 + ks.dot(Kinv * (Y.array() - 0.5).matrix());
  const double var = 1.0 + j - ks.dot(Kinv * ks);
  const auto p = gp.predict(Eigen::MatrixXd::Constant(1, 1, 0.5));
  EXPECT_NEAR(p.mean(0), mean, 1e-10);
  EXPECT_NEAR(p.variance(0), var, 1e-10);
}

TEST(GpModel, InterpolationAndPriorReversion) {
  lf::Rng rng(9);
  Eigen::MatrixXd X(6, 2);
  for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.uniform(-1, 1);
  Eigen::VectorXd Y(6);
  for (int i = 0; i < 6; ++i) Y(i) = 3 + 2 * std::sin(3 * X(i, 0)) + X(i, 1);
  const auto gp = lf::fitGp(X, Y);
  const auto p = gp.predict(X);
  EXPECT_LT((p.mean - Y).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(p.variance.maxCoeff(), 2 * gp.jitterVariance() * (1 + 1e-6));
  Eigen::MatrixXd far(1, 2);
  far << 1e3, 1e3;
  const auto q = gp.predict(far);
  EXPECT_NEAR(q.mean(0), gp.priorMean(), 1e-6);
  EXPECT_NEAR(q.variance(0), gp.priorVariance() + gp.jitterVariance(), 1e-6);
}

TEST(FitGp, ConstantTargetCollapsesVariance) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(6, 2);
  const auto gp = lf::fitGp(X, Eigen::VectorXd::Constant(6, 4.2));
  EXPECT_LT(gp.priorVariance(), 1e-6);
  EXPECT_NEAR(gp.priorMean(), 4.2, 1e-6);
}

TEST(FitGp, RecoversLengthScale) {
  std::vector<double> omegas;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    lf::Rng r({s, 7});
    const int n = 40;
    Eigen::MatrixXd X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = r.uniform(-2, 2);
    Eigen::MatrixXd C = lf::covarianceMatrix(X, X, hyper(1, 0.5, 0.0, 0.0));
    C.diagonal().array() += 1e-8;
    const Eigen::LLT<Eigen::MatrixXd> llt(C);
    const Eigen::VectorXd Y = llt.matrixL() * r.normalVector(n);
    omegas.push_back(lf::fitGp(X, Y, {8, s}).hyper().omega(0));
  }
  std::sort(omegas.begin(), omegas.end());
  EXPECT_NEAR(omegas[2], 0.5, 0.5);
}

TEST(FitGp, MoreRestartsNeverWorse) {
  lf::Rng rng(4);
  for (int t = 0; t < 5; ++t) {
    const Eigen::MatrixXd X = rng.normalMatrix(12, 2);
    Eigen::VectorXd Y(12);
    for (int i = 0; i < 12; ++i) Y(i) = std::sin(2 * X(i, 0)) * X(i, 1);
    EXPECT_GE(lf::fitGp(X, Y, {8, 3}).logEvidence(), lf::fitGp(X, Y, {1, 3}).logEvidence() - 1e-9);
  }
}

TEST(GpModel, SaveLoadRoundTrip) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(5, 2);
  const auto gp = lf::fitGp(X, Eigen::VectorXd::Random(5));
  std::stringstream s;
  gp.save(s);
  const auto back = lf::GpModel::load(s);
  const Eigen::MatrixXd x0 = Eigen::MatrixXd::Random(3, 2);
  EXPECT_TRUE(back.predict(x0).mean.isApprox(gp.predict(x0).mean, 1e-14));
}

TEST(SamplePosterior, EmpiricalCovarianceMatchesAnalytic) {
  Eigen::MatrixXd X(4, 1);
  X << -1.0, -0.3, 0.4, 1.0;
  const lf::GpModel gp(X, Eigen::Vector4d(0.2, -0.5, 0.3, 1.0), hyper(1, 0.0, 0.0, 0.0));
  Eigen::MatrixXd Xc(3, 1);
  Xc << -0.6, 0.0, 0.8;
  const int N = 10000;
  const auto draws = lf::samplePosterior({gp}, Xc, N, 12);
  ASSERT_EQ(draws.size(), 1u);
  const Eigen::MatrixXd& D = draws[0];
  const Eigen::RowVectorXd mu = D.colwise().mean();
  const Eigen::MatrixXd centered = D.rowwise() - mu;
  const Eigen::MatrixXd emp = centered.transpose() * centered / (N - 1);
  const Eigen::MatrixXd cov = gp.posteriorCovariance(Xc);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(emp(i, j), cov(i, j), 0.05 * std::sqrt(cov(i, i) * cov(j, j)));
  EXPECT_EQ(lf::samplePosterior({gp}, Xc, 50, 12)[0], lf::samplePosterior({gp}, Xc, 50, 12)[0]);
}

TEST(GpModel, ExtraObservationNeverIncreasesVariance) {
  lf::Rng rng(31);
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd X(5, 1);
    for (int i = 0; i < 5; ++i) X(i, 0) = rng.uniform(-2, 2);
    const lf::GpModel gp(X, rng.normalVector(5), hyper(1, rng.uniform(-1, 1), rng.uniform(-1, 1), 0.0));
    const auto more = gp.withObservation(Eigen::VectorXd::Constant(1, rng.uniform(-2, 2)), rng.normal());
    Eigen::MatrixXd sites(41, 1);
    for (int i = 0; i < 41; ++i) sites(i, 0) = -3.0 + 0.15 * i;
    const auto before = gp.predict(sites), after = more.predict(sites);
    for (int i = 0; i < 41; ++i) {
      EXPECT_LE(after.variance(i), before.variance(i) + 1e-12);
      EXPECT_GE(before.variance(i), 0.0);
      EXPECT_LE(before.variance(i), gp.priorVariance() + gp.jitterVariance() + 1e-12);
    }
  }
}

TEST(GpModel, StandardizationRoundTrip) {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 2);
  const lf::GpModel gp(X, Eigen::Vector4d(10.0, 12.5, 9.0, 11.0), hyper(2, 0.0, 0.0, 0.0));
  for (double y : {-3.0, 0.0, 10.0, 1e4}) EXPECT_NEAR(gp.unstandardize(gp.standardize(y)), y, 1e-12 * std::max(1.0, std::abs(y)));
}
