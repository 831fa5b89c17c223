#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

namespace latentflow::nn {

enum class Activation : std::uint8_t { LeakyRelu = 0, Sigmoid = 1, Tanh = 2, Linear = 3 };
enum class Mode { Train, Eval };

struct LayerSpec {
  int inputs = 0;
  int outputs = 0;
  Activation activation = Activation::Linear;
  double leak = 0.2;  ///< LeakyReLU slope, in (0,1)
  bool batchNorm = false;
};

/// Affine map, optional batch normalization, then activation.
struct DenseLayer {
  Eigen::MatrixXd weight;  ///< outputs x inputs
  Eigen::VectorXd bias;
  Activation activation = Activation::Linear;
  double leak = 0.2;
  bool batchNorm = false;
  Eigen::VectorXd scale;  ///< batch-norm gamma
  Eigen::VectorXd shift;  ///< batch-norm beta
  Eigen::VectorXd runningMean;
  Eigen::VectorXd runningVar;

  Eigen::Index parameterCount() const;
};

inline constexpr double kBatchNormEpsilon = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

/// Intermediates recorded by a TRAIN forward pass.
struct ForwardCache {
  struct Layer {
    Eigen::MatrixXd input;
    Eigen::MatrixXd normalized;  ///< x-hat when batch norm is on
    Eigen::RowVectorXd invStd;
    Eigen::MatrixXd preActivation;
    Eigen::MatrixXd output;
  };
  std::vector<Layer> layers;
  std::uint64_t version = 0;
};

struct Gradients {
  Eigen::VectorXd parameters;  ///< flat, same order as DenseNetwork::parameters()
  Eigen::MatrixXd input;       ///< d loss / d input batch
};

/// Fully connected network over row-major batches (one sample per row).
class DenseNetwork {
public:
  DenseNetwork() = default;
  DenseNetwork(const std::vector<LayerSpec>& specs, std::uint64_t seed);

  int inputWidth() const;
  int outputWidth() const;
  const std::vector<DenseLayer>& layers() const { return layers_; }

  /// EVAL forward: uses running batch-norm statistics, no side effects.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch) const;
  /// TRAIN forward: batch statistics, updates running statistics, fills cache.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, ForwardCache& cache);
  Eigen::MatrixXd forward(const Eigen::MatrixXd& batch, Mode mode);

  /// Reverse pass for a scalar loss whose gradient w.r.t. the output is outputGrad.
  Gradients backward(const ForwardCache& cache, const Eigen::MatrixXd& outputGrad) const;

  Eigen::Index parameterCount() const;
  Eigen::VectorXd parameters() const;
  void setParameters(const Eigen::VectorXd& flat);

  void save(std::ostream& out) const;
  static DenseNetwork load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static DenseNetwork load(const std::filesystem::path& path);

private:
  std::vector<DenseLayer> layers_;
  std::uint64_t version_ = 1;
};

struct AdamConfig {
  double learningRate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Eigen::VectorXd firstMoment;
  Eigen::VectorXd secondMoment;
  long step = 0;
};

/// One bias-corrected Adam update. Throws NumericFailure (leaving params and
/// state untouched) when the gradient holds a non-finite entry.
void adamStep(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace latentflow::nn
