#include <gtest/gtest.h>

#include <cmath>

#include "latentflow/errors.hpp"
#include "latentflow/nn.hpp"
#include "latentflow/rng.hpp"

namespace lf = latentflow;
namespace nn = latentflow::nn;

namespace {

// Scalar loss sum(W .* out) so the output gradient is W.
double weightedLoss(const Eigen::MatrixXd& out, const Eigen::MatrixXd& w) { return (out.array() * w.array()).sum(); }

}  // namespace

TEST(Dense, IdentityLayer) {
  nn::DenseNetwork net({{3, 3, nn::Activation::Linear}}, 1);
  Eigen::VectorXd p = net.parameters();
  p.setZero();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  p.head(9) = eye.reshaped();
  net.setParameters(p);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 3);
  EXPECT_TRUE(net.forward(x).isApprox(x, 1e-15));
}

TEST(Dense, LeakyReluDefinition) {
  nn::DenseNetwork net({{1, 1, nn::Activation::LeakyRelu, 0.2}}, 1);
  net.setParameters(Eigen::Vector2d(1.0, 0.0));
  EXPECT_DOUBLE_EQ(net.forward(Eigen::MatrixXd::Constant(1, 1, -1.0))(0, 0), -0.2);
}

TEST(Dense, MatchesHandArithmetic) {
  nn::DenseNetwork net({{2, 3, nn::Activation::Tanh}, {3, 1, nn::Activation::Sigmoid}}, 4);
  const auto& L = net.layers();
  Eigen::MatrixXd x(2, 2);
  x << 0.3, -0.7, 1.1, 0.4;
  const Eigen::MatrixXd h = ((x * L[0].weight.transpose()).rowwise() + L[0].bias.transpose()).array().tanh().matrix();
  const Eigen::MatrixXd z = (h * L[1].weight.transpose()).rowwise() + L[1].bias.transpose();
  const Eigen::MatrixXd y = (1.0 / (1.0 + (-z.array()).exp())).matrix();
  EXPECT_TRUE(net.forward(x).isApprox(y, 1e-14));
}

TEST(Dense, ZeroOutputGradientGivesZeroGradient) {
  nn::DenseNetwork net({{3, 4, nn::Activation::LeakyRelu, 0.2, true}, {4, 2, nn::Activation::Linear}}, 2);
  nn::ForwardCache cache;
  const Eigen::MatrixXd out = net.forward(Eigen::MatrixXd::Random(5, 3), cache);
  const auto g = net.backward(cache, Eigen::MatrixXd::Zero(out.rows(), out.cols()));
  EXPECT_EQ(g.parameters.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Dense, BackwardMatchesFiniteDifferences) {
  lf::Rng rng(21);
  const nn::Activation acts[] = {nn::Activation::LeakyRelu, nn::Activation::Tanh, nn::Activation::Sigmoid,
                                 nn::Activation::Linear};
  for (int trial = 0; trial < 10; ++trial) {
    const int layers = 1 + static_cast<int>(rng.below(3));
    std::vector<nn::LayerSpec> specs;
    int width = 2 + static_cast<int>(rng.below(4));
    const int in = width;
    for (int l = 0; l < layers; ++l) {
      const int out = 2 + static_cast<int>(rng.below(4));
      specs.push_back({width, out, acts[rng.below(4)], 0.2, l + 1 < layers && rng.below(2) == 0});
      width = out;
    }
    nn::DenseNetwork net(specs, 100 + trial);
    const Eigen::MatrixXd x = rng.normalMatrix(6, in);
    const Eigen::MatrixXd w = rng.normalMatrix(6, width);
    nn::ForwardCache cache;
    net.forward(x, cache);
    const auto g = net.backward(cache, w);
    const Eigen::VectorXd p0 = net.parameters();
    for (Eigen::Index k = 0; k < p0.size(); ++k) {
      const double h = 1e-6;
      Eigen::VectorXd p = p0;
      p(k) += h;
      net.setParameters(p);
      nn::ForwardCache c1;
      const double up = weightedLoss(net.forward(x, c1), w);
      p(k) -= 2 * h;
      net.setParameters(p);
      nn::ForwardCache c2;
      const double down = weightedLoss(net.forward(x, c2), w);
      const double fd = (up - down) / (2 * h);
      EXPECT_NEAR(g.parameters(k), fd, 1e-4 * std::max(1.0, std::abs(fd)));
    }
    net.setParameters(p0);
  }
}

TEST(Dense, StaleCacheRejected) {
  nn::DenseNetwork net({{2, 2, nn::Activation::Linear}}, 1);
  nn::ForwardCache cache;
  net.forward(Eigen::MatrixXd::Ones(2, 2), cache);
  net.setParameters(net.parameters());
  EXPECT_THROW(net.backward(cache, Eigen::MatrixXd::Ones(2, 2)), lf::Error);
}

TEST(Dense, SaveLoadRoundTrip) {
  nn::DenseNetwork net({{3, 4, nn::Activation::LeakyRelu, 0.2, true}, {4, 1, nn::Activation::Sigmoid}}, 9);
  nn::ForwardCache cache;
  net.forward(Eigen::MatrixXd::Random(8, 3), cache);
  std::stringstream s;
  net.save(s);
  const auto back = nn::DenseNetwork::load(s);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 3);
  EXPECT_EQ(back.forward(x), net.forward(x));
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(4, -1, 1);
  const Eigen::VectorXd before = p;
  nn::AdamState s;
  nn::adamStep(p, Eigen::VectorXd::Zero(4), s, {});
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, FirstStepHasMagnitudeLearningRate) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3);
  nn::AdamState s;
  nn::AdamConfig cfg;
  nn::adamStep(p, Eigen::Vector3d(2.0, -0.5, 1e-3), s, cfg);
  EXPECT_NEAR(p(0), -cfg.learningRate, 1e-9);
  EXPECT_NEAR(p(1), cfg.learningRate, 1e-9);
  EXPECT_NEAR(p(2), -cfg.learningRate, 1e-8);
}

TEST(Adam, NonFiniteGradientAborts) {
  Eigen::VectorXd p = Eigen::VectorXd::Ones(2);
  nn::AdamState s;
  EXPECT_THROW(nn::adamStep(p, Eigen::Vector2d(1.0, NAN), s, {}), lf::NumericFailure);
  EXPECT_EQ(p, Eigen::VectorXd::Ones(2));
  EXPECT_EQ(s.step, 0);
}
