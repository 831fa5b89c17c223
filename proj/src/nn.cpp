#include "latentflow/nn.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include "latentflow/errors.hpp"
#include "latentflow/rng.hpp"

namespace latentflow::nn {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& y, Activation act, double leak) {
  switch (act) {
    case Activation::LeakyRelu: return y.unaryExpr([leak](double v) { return v > 0 ? v : leak * v; });
    case Activation::Sigmoid: return y.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    case Activation::Tanh: return y.array().tanh().matrix();
    case Activation::Linear: return y;
  }
  return y;
}

// Derivative expressed through pre-activation y and output a.
Eigen::MatrixXd activationSlope(const Eigen::MatrixXd& y, const Eigen::MatrixXd& a, Activation act, double leak) {
  switch (act) {
    case Activation::LeakyRelu: return y.unaryExpr([leak](double v) { return v > 0 ? 1.0 : leak; });
    case Activation::Sigmoid: return (a.array() * (1.0 - a.array())).matrix();
    case Activation::Tanh: return (1.0 - a.array().square()).matrix();
    case Activation::Linear: return Eigen::MatrixXd::Ones(y.rows(), y.cols());
  }
  return Eigen::MatrixXd::Ones(y.rows(), y.cols());
}

template <typename T>
void writeRaw(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T readRaw(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated network checkpoint");
  return v;
}

void requireFinite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericFailure(std::string("non-finite ") + what);
}

}  // namespace

Eigen::Index DenseLayer::parameterCount() const {
  return weight.size() + bias.size() + (batchNorm ? scale.size() + shift.size() : 0);
}

DenseNetwork::DenseNetwork(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
  if (specs.empty()) throw DomainError("network needs at least one layer");
  Rng rng({seed, 0x17e7ULL});
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    if (s.inputs < 1 || s.outputs < 1) throw DomainError("layer widths must be positive");
    if (i > 0 && specs[i - 1].outputs != s.inputs) throw DimensionMismatch("layer widths do not chain");
    if (s.activation == Activation::LeakyRelu && !(s.leak > 0.0 && s.leak < 1.0))
      throw DomainError("LeakyReLU slope must lie in (0,1)");
    DenseLayer layer;
    const double limit = 1.0 / std::sqrt(static_cast<double>(s.inputs));
    layer.weight.resize(s.outputs, s.inputs);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = rng.uniform(-limit, limit);
    layer.bias.resize(s.outputs);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = rng.uniform(-limit, limit);
    layer.activation = s.activation;
    layer.leak = s.leak;
    layer.batchNorm = s.batchNorm;
    if (s.batchNorm) {
      layer.scale = Eigen::VectorXd::Ones(s.outputs);
      layer.shift = Eigen::VectorXd::Zero(s.outputs);
      layer.runningMean = Eigen::VectorXd::Zero(s.outputs);
      layer.runningVar = Eigen::VectorXd::Ones(s.outputs);
    }
    layers_.push_back(std::move(layer));
  }
}

int DenseNetwork::inputWidth() const { return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.cols()); }
int DenseNetwork::outputWidth() const { return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.rows()); }

Eigen::MatrixXd DenseNetwork::forward(const Eigen::MatrixXd& batch) const {
  if (batch.cols() != inputWidth()) throw DimensionMismatch("batch width differs from network input");
  requireFinite(batch, "network input");
  Eigen::MatrixXd x = batch;
  for (const auto& layer : layers_) {
    Eigen::MatrixXd y = (x * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    if (layer.batchNorm) {
      const Eigen::RowVectorXd invStd =
          (layer.runningVar.array() + kBatchNormEpsilon).rsqrt().matrix().transpose();
      y = ((y.rowwise() - layer.runningMean.transpose()).array().rowwise() *
           (invStd.array() * layer.scale.transpose().array()))
              .matrix();
      y.rowwise() += layer.shift.transpose();
    }
    x = activate(y, layer.activation, layer.leak);
  }
  return x;
}

Eigen::MatrixXd DenseNetwork::forward(const Eigen::MatrixXd& batch, ForwardCache& cache) {
  if (batch.cols() != inputWidth()) throw DimensionMismatch("batch width differs from network input");
  requireFinite(batch, "network input");
  cache.layers.assign(layers_.size(), {});
  cache.version = version_;
  Eigen::MatrixXd x = batch;
  const double n = static_cast<double>(batch.rows());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    auto& layer = layers_[i];
    auto& c = cache.layers[i];
    c.input = x;
    Eigen::MatrixXd y = (x * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    if (layer.batchNorm) {
      const Eigen::RowVectorXd mean = y.colwise().mean();
      const Eigen::MatrixXd centered = y.rowwise() - mean;
      const Eigen::RowVectorXd var = centered.array().square().colwise().sum() / n;
      c.invStd = (var.array() + kBatchNormEpsilon).rsqrt().matrix();
      c.normalized = (centered.array().rowwise() * c.invStd.array()).matrix();
      y = (c.normalized.array().rowwise() * layer.scale.transpose().array()).matrix();
      y.rowwise() += layer.shift.transpose();
      layer.runningMean = kBatchNormMomentum * layer.runningMean + (1.0 - kBatchNormMomentum) * mean.transpose();
      layer.runningVar = kBatchNormMomentum * layer.runningVar + (1.0 - kBatchNormMomentum) * var.transpose();
    }
    c.preActivation = y;
    x = activate(y, layer.activation, layer.leak);
    c.output = x;
  }
  return x;
}

Eigen::MatrixXd DenseNetwork::forward(const Eigen::MatrixXd& batch, Mode mode) {
  if (mode == Mode::Eval) return std::as_const(*this).forward(batch);
  ForwardCache cache;
  return forward(batch, cache);
}

Gradients DenseNetwork::backward(const ForwardCache& cache, const Eigen::MatrixXd& outputGrad) const {
  if (cache.version != version_ || cache.layers.size() != layers_.size())
    throw Error("stale forward cache: parameters changed since the TRAIN forward pass");
  if (outputGrad.cols() != outputWidth() || outputGrad.rows() != cache.layers.back().output.rows())
    throw DimensionMismatch("output gradient shape");

  Gradients g;
  g.parameters.resize(parameterCount());
  Eigen::Index offset = g.parameters.size();
  Eigen::MatrixXd delta = outputGrad;
  const double n = static_cast<double>(outputGrad.rows());

  for (std::size_t idx = layers_.size(); idx-- > 0;) {
    const auto& layer = layers_[idx];
    const auto& c = cache.layers[idx];
    offset -= layer.parameterCount();
    Eigen::Index cursor = offset;

    Eigen::MatrixXd dy =
        (delta.array() * activationSlope(c.preActivation, c.output, layer.activation, layer.leak).array()).matrix();

    Eigen::MatrixXd dz = dy;
    Eigen::VectorXd dScale;
    Eigen::VectorXd dShift;
    if (layer.batchNorm) {
      dScale = (dy.array() * c.normalized.array()).colwise().sum().transpose();
      dShift = dy.colwise().sum().transpose();
      const Eigen::MatrixXd dxhat = (dy.array().rowwise() * layer.scale.transpose().array()).matrix();
      const Eigen::RowVectorXd sumDxhat = dxhat.colwise().sum();
      const Eigen::RowVectorXd sumDxhatXhat = (dxhat.array() * c.normalized.array()).colwise().sum();
      Eigen::MatrixXd t = n * dxhat;
      t.rowwise() -= sumDxhat;
      t -= (c.normalized.array().rowwise() * sumDxhatXhat.array()).matrix();
      dz = (t.array().rowwise() * (c.invStd.array() / n)).matrix();
    }

    const Eigen::MatrixXd dW = dz.transpose() * c.input;
    g.parameters.segment(cursor, dW.size()) = Eigen::Map<const Eigen::VectorXd>(dW.data(), dW.size());
    cursor += dW.size();
    g.parameters.segment(cursor, layer.bias.size()) = dz.colwise().sum().transpose();
    cursor += layer.bias.size();
    if (layer.batchNorm) {
      g.parameters.segment(cursor, dScale.size()) = dScale;
      cursor += dScale.size();
      g.parameters.segment(cursor, dShift.size()) = dShift;
    }
    delta = dz * layer.weight;
  }
  g.input = std::move(delta);
  return g;
}

Eigen::Index DenseNetwork::parameterCount() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_) n += l.parameterCount();
  return n;
}

Eigen::VectorXd DenseNetwork::parameters() const {
  Eigen::VectorXd flat(parameterCount());
  Eigen::Index at = 0;
  auto put = [&](const auto& m) {
    flat.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    at += m.size();
  };
  for (const auto& l : layers_) {
    put(l.weight);
    put(l.bias);
    if (l.batchNorm) {
      put(l.scale);
      put(l.shift);
    }
  }
  return flat;
}

void DenseNetwork::setParameters(const Eigen::VectorXd& flat) {
  if (flat.size() != parameterCount()) throw DimensionMismatch("flat parameter length");
  Eigen::Index at = 0;
  auto take = [&](auto& m) {
    Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
    at += m.size();
  };
  for (auto& l : layers_) {
    take(l.weight);
    take(l.bias);
    if (l.batchNorm) {
      take(l.scale);
      take(l.shift);
    }
  }
  ++version_;
}

void DenseNetwork::save(std::ostream& out) const {
  out.write("LFNN", 4);
  writeRaw<std::uint32_t>(out, static_cast<std::uint32_t>(layers_.size()));
  for (const auto& l : layers_) {
    writeRaw<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.cols()));
    writeRaw<std::uint32_t>(out, static_cast<std::uint32_t>(l.weight.rows()));
    writeRaw<std::uint8_t>(out, static_cast<std::uint8_t>(l.activation));
    writeRaw<std::uint8_t>(out, l.batchNorm ? 1 : 0);
    writeRaw<double>(out, l.leak);
  }
  auto dump = [&](const auto& m) {
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  };
  for (const auto& l : layers_) {
    dump(l.weight);
    dump(l.bias);
    if (l.batchNorm) {
      dump(l.scale);
      dump(l.shift);
      dump(l.runningMean);
      dump(l.runningVar);
    }
  }
  if (!out) throw IoError("failed writing network checkpoint");
}

DenseNetwork DenseNetwork::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "LFNN") throw FormatError("missing LFNN magic");
  const auto count = readRaw<std::uint32_t>(in);
  std::vector<LayerSpec> specs;
  for (std::uint32_t i = 0; i < count; ++i) {
    LayerSpec s;
    s.inputs = static_cast<int>(readRaw<std::uint32_t>(in));
    s.outputs = static_cast<int>(readRaw<std::uint32_t>(in));
    const auto act = readRaw<std::uint8_t>(in);
    if (act > 3) throw FormatError("unknown activation code");
    s.activation = static_cast<Activation>(act);
    s.batchNorm = readRaw<std::uint8_t>(in) != 0;
    s.leak = readRaw<double>(in);
    specs.push_back(s);
  }
  DenseNetwork net(specs, 0);
  auto fill = [&](auto& m) {
    if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double))))
      throw FormatError("truncated network parameters");
  };
  for (auto& l : net.layers_) {
    fill(l.weight);
    fill(l.bias);
    if (l.batchNorm) {
      fill(l.scale);
      fill(l.shift);
      fill(l.runningMean);
      fill(l.runningVar);
    }
  }
  return net;
}

void DenseNetwork::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string());
  save(out);
}

DenseNetwork DenseNetwork::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return load(in);
}

void adamStep(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state, const AdamConfig& cfg) {
  if (grads.size() != params.size()) throw DimensionMismatch("gradient length differs from parameters");
  if (!grads.allFinite()) throw NumericFailure("non-finite gradient; Adam step aborted");
  if (state.firstMoment.size() != params.size()) {
    state.firstMoment = Eigen::VectorXd::Zero(params.size());
    state.secondMoment = Eigen::VectorXd::Zero(params.size());
  }
  ++state.step;
  state.firstMoment = cfg.beta1 * state.firstMoment + (1.0 - cfg.beta1) * grads;
  state.secondMoment = cfg.beta2 * state.secondMoment + (1.0 - cfg.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  params.array() -= cfg.learningRate * (state.firstMoment.array() / c1) /
                    ((state.secondMoment.array() / c2).sqrt() + cfg.epsilon);
}

}  // namespace latentflow::nn
