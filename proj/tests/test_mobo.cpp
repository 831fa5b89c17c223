#include <gtest/gtest.h>

#include <cmath>

#include "latentflow/errors.hpp"
#include "latentflow/mobo.hpp"
#include "latentflow/pareto.hpp"

namespace lf = latentflow;

namespace {

std::vector<lf::GpModel> toyModels(Eigen::MatrixXd& X, Eigen::MatrixXd& Y) {
  X.resize(8, 2);
  Y.resize(8, 2);
  for (int i = 0; i < 8; ++i) {
    X(i, 0) = -1.5 + 3.0 * i / 7.0;
    X(i, 1) = std::sin(1.3 * i);
    Y(i, 0) = (X.row(i) - Eigen::RowVector2d(1, 0)).squaredNorm();
    Y(i, 1) = (X.row(i) + Eigen::RowVector2d(1, 0)).squaredNorm();
  }
  return {lf::fitGp(X, Y.col(0)), lf::fitGp(X, Y.col(1))};
}

// Convex bi-objective toy evaluated directly in latent space.
lf::Evaluator toyEvaluator(int failEvery = 0) {
  return [failEvery](const Eigen::MatrixXd& X) {
    std::vector<std::optional<Eigen::VectorXd>> out;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (failEvery > 0 && (i + 1) % failEvery == 0) {
        out.emplace_back(std::nullopt);
        continue;
      }
      Eigen::VectorXd a = Eigen::VectorXd::Zero(X.cols()), b = a;
      a(0) = 1.0;
      b(0) = -1.0;
      out.emplace_back(Eigen::Vector2d((X.row(i).transpose() - a).squaredNorm(), (X.row(i).transpose() - b).squaredNorm()));
    }
    return out;
  };
}

}  // namespace

TEST(SobolBall, EveryPointInsideBall) {
  const Eigen::MatrixXd X = lf::sobolBallDoe(8, 20, 2.0, 1);
  ASSERT_EQ(X.rows(), 20);
  ASSERT_EQ(X.cols(), 8);
  for (Eigen::Index i = 0; i < X.rows(); ++i) EXPECT_LE(X.row(i).norm(), 2.0);
  EXPECT_EQ(X, lf::sobolBallDoe(8, 20, 2.0, 1));
}

TEST(SobolBall, AcceptanceFraction) {
  lf::SobolBallSampler s(8, 2.0, 3);
  for (int i = 0; i < 100000; ++i) s.tryNext();
  const double frac = static_cast<double>(s.accepted()) / static_cast<double>(s.candidates());
  EXPECT_GT(frac, 0.013);
  EXPECT_LT(frac, 0.019);
}

TEST(SobolBall, StallReported) {
  lf::SobolBallSampler s(40, 1.0, 1);
  EXPECT_THROW(s.next(1000), lf::NumericFailure);
}

TEST(ProjectToBall, ExactBound) {
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(8, 3.0);
  EXPECT_LE(lf::projectToBall(x, 2.0).norm(), 2.0);
  EXPECT_EQ(lf::projectToBall(Eigen::Vector2d(0.1, 0.2), 2.0), Eigen::Vector2d(0.1, 0.2));
}

TEST(ReferencePoint, MaxPlusTenPercentSpan) {
  Eigen::MatrixXd Y(3, 2);
  Y << 0, 10, 1, 5, 2, 0;
  const auto r = lf::referencePoint(Y);
  EXPECT_DOUBLE_EQ(r(0), 2.2);
  EXPECT_DOUBLE_EQ(r(1), 11.0);
  const auto flat = lf::referencePoint(Eigen::MatrixXd::Constant(2, 2, 1.0));
  EXPECT_GT(flat(0), 1.0);
}

TEST(Ehvi, ZeroVarianceReducesToHvi) {
  Eigen::MatrixXd X, Y;
  const auto models = toyModels(X, Y);
  Eigen::MatrixXd P(2, 2);
  P << 1, 2, 2, 1;
  const Eigen::Vector2d r(3, 3);
  const lf::EhviAcquisition acq(models, P, r, 256, 1);
  const Eigen::Vector2d mu(0.5, 0.5);
  EXPECT_NEAR(acq.fromMoments(mu, Eigen::Vector2d::Zero()), lf::hvi(P, mu, r), 1e-12);
  EXPECT_NEAR(acq.fromMoments(Eigen::Vector2d(2.5, 2.5), Eigen::Vector2d::Constant(1e-6)), 0.0, 1e-12);
}

TEST(Ehvi, CommonRandomNumbers) {
  Eigen::MatrixXd X, Y;
  const auto models = toyModels(X, Y);
  const auto r = lf::referencePoint(Y);
  const lf::EhviAcquisition acq(models, Y, r, 128, 4);
  const Eigen::Vector2d x0(0.1, -0.2);
  EXPECT_EQ(acq(x0), acq(x0));
  EXPECT_EQ(acq(x0), lf::ehvi(models, x0, Y, r, 128, 4));
}

TEST(ProposeBatch, SinglePickIsInsideBall) {
  Eigen::MatrixXd X, Y;
  const auto models = toyModels(X, Y);
  lf::ProposeOptions opt;
  opt.batchSize = 1;
  opt.restarts = 8;
  opt.mcSamples = 64;
  const auto p = lf::proposeBatch(models, Y, lf::referencePoint(Y), opt);
  ASSERT_EQ(p.points.rows(), 1);
  EXPECT_LE(p.points.row(0).norm(), opt.radius);
  EXPECT_EQ(p.acquisition.size(), 1u);
}

TEST(ProposeBatch, FiveDistinctPicks) {
  Eigen::MatrixXd X, Y;
  const auto models = toyModels(X, Y);
  lf::ProposeOptions opt;
  opt.restarts = 8;
  opt.mcSamples = 64;
  const auto p = lf::proposeBatch(models, Y, lf::referencePoint(Y), opt);
  ASSERT_EQ(p.points.rows(), 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_LE(p.points.row(i).norm(), opt.radius);
    for (int j = 0; j < i; ++j) EXPECT_GT((p.points.row(i) - p.points.row(j)).norm(), 0.0);
  }
}

TEST(RunLoop, ZeroBatchesKeepsDesignOnly) {
  lf::LoopConfig cfg;
  cfg.latentDim = 3;
  cfg.batches = 0;
  const auto h = lf::runLoop(toyEvaluator(), cfg);
  EXPECT_EQ(h.evaluations.size(), 20u);
  for (const auto& e : h.evaluations) EXPECT_EQ(e.batch, 0);
  EXPECT_FALSE(h.aborted);
}

TEST(RunLoop, HypervolumeNonDecreasingAndFailuresExcluded) {
  lf::LoopConfig cfg;
  cfg.latentDim = 3;
  cfg.restarts = 8;
  cfg.mcSamples = 64;
  const auto h = lf::runLoop(toyEvaluator(4), cfg);
  ASSERT_FALSE(h.aborted) << h.message;
  EXPECT_EQ(h.evaluations.size(), 35u);
  ASSERT_EQ(h.batches.size(), 4u);  // initial design plus three batches
  EXPECT_EQ(h.batches.front().batch, 0);
  for (std::size_t b = 1; b < h.batches.size(); ++b) EXPECT_GE(h.batches[b].hypervolume, h.batches[b - 1].hypervolume);
  int failed = 0;
  for (const auto& e : h.evaluations) failed += !e.y;
  EXPECT_GT(failed, 0);
  for (const auto& b : h.batches)
    for (int id : b.archiveIds) EXPECT_TRUE(h.evaluations[static_cast<std::size_t>(id)].y.has_value());
}

TEST(RunLoop, TotalFailureAborts) {
  lf::LoopConfig cfg;
  cfg.latentDim = 2;
  const auto h = lf::runLoop(toyEvaluator(1), cfg);
  EXPECT_TRUE(h.aborted);
  EXPECT_FALSE(h.message.empty());
}

TEST(RunLoop, SeedReproducible) {
  lf::LoopConfig cfg;
  cfg.latentDim = 2;
  cfg.batches = 1;
  cfg.restarts = 4;
  cfg.mcSamples = 32;
  const auto a = lf::runLoop(toyEvaluator(), cfg), b = lf::runLoop(toyEvaluator(), cfg);
  EXPECT_EQ(a.finalHypervolume(), b.finalHypervolume());
  EXPECT_EQ(a.evaluations.back().x, b.evaluations.back().x);
}
