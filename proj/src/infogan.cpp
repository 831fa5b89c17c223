#include "latentflow/infogan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "latentflow/errors.hpp"
#include "latentflow/rng.hpp"

namespace latentflow {

namespace {

constexpr double kLeak = 0.2;
constexpr double kProbabilityFloor = 1e-12;

std::vector<nn::LayerSpec> generatorSpecs(int d, int pixels) {
  return {{d, 128, nn::Activation::LeakyRelu, kLeak, true},
          {128, 256, nn::Activation::LeakyRelu, kLeak, true},
          {256, pixels * kClassCount, nn::Activation::Linear, kLeak, false}};
}

std::vector<nn::LayerSpec> discriminatorSpecs(int pixels) {
  return {{pixels * kClassCount, 256, nn::Activation::LeakyRelu, kLeak, false},
          {256, 128, nn::Activation::LeakyRelu, kLeak, false},
          {128, 1, nn::Activation::Sigmoid, kLeak, false}};
}

std::vector<nn::LayerSpec> auxiliarySpecs(int pixels, int d) {
  return {{pixels * kClassCount, 256, nn::Activation::LeakyRelu, kLeak, true},
          {256, 128, nn::Activation::LeakyRelu, kLeak, true},
          {128, d, nn::Activation::Linear, kLeak, false}};
}

// Gradient of a loss through the per-pixel softmax, given probabilities and dL/dprob.
Eigen::MatrixXd softmaxBackward(const Eigen::MatrixXd& prob, const Eigen::MatrixXd& gradProb) {
  Eigen::MatrixXd out(prob.rows(), prob.cols());
  for (Eigen::Index r = 0; r < prob.rows(); ++r) {
    for (Eigen::Index c = 0; c < prob.cols(); c += kClassCount) {
      double dot = 0.0;
      for (int k = 0; k < kClassCount; ++k) dot += prob(r, c + k) * gradProb(r, c + k);
      for (int k = 0; k < kClassCount; ++k) out(r, c + k) = prob(r, c + k) * (gradProb(r, c + k) - dot);
    }
  }
  return out;
}

double meanPixelVariance(const Eigen::MatrixXd& batch) {
  if (batch.rows() < 2) return 0.0;
  const Eigen::RowVectorXd mean = batch.colwise().mean();
  return (batch.rowwise() - mean).array().square().colwise().mean().mean();
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Eigen::MatrixXd pixelSoftmax(const Eigen::MatrixXd& logits) {
  if (logits.cols() % kClassCount != 0) throw DimensionMismatch("logit width is not a multiple of the class count");
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    for (Eigen::Index c = 0; c < logits.cols(); c += kClassCount) {
      const double m = logits.row(r).segment(c, kClassCount).maxCoeff();
      double sum = 0.0;
      for (int k = 0; k < kClassCount; ++k) sum += out(r, c + k) = std::exp(logits(r, c + k) - m);
      for (int k = 0; k < kClassCount; ++k) out(r, c + k) /= sum;
    }
  }
  return out;
}

InfoGanModel InfoGanModel::create(int latentDim, int width, int height, std::uint64_t seed) {
  if (latentDim < 1) throw DomainError("latent dimension must be positive");
  if (width < 1 || height < 1) throw DomainError("raster size must be positive");
  const int pixels = width * height;
  InfoGanModel m;
  m.latentDim_ = latentDim;
  m.width_ = width;
  m.height_ = height;
  m.generator = nn::DenseNetwork(generatorSpecs(latentDim, pixels), hashKeys({seed, 0x6e}));
  m.discriminator = nn::DenseNetwork(discriminatorSpecs(pixels), hashKeys({seed, 0xd1}));
  m.auxiliary = nn::DenseNetwork(auxiliarySpecs(pixels, latentDim), hashKeys({seed, 0xa0}));
  return m;
}

InfoGanModel::Generated InfoGanModel::generate(const Eigen::MatrixXd& latents) const {
  if (!trained_) throw Error("model has not been trained");
  if (latents.cols() != latentDim_) throw DimensionMismatch("latent width differs from model latent dimension");
  Generated g;
  for (Eigen::Index r = 0; r < latents.rows(); ++r)
    if (latents.row(r).norm() > 2.0) ++g.overNorm;
  g.probabilities = pixelSoftmax(generator.forward(latents));
  g.rasters.reserve(static_cast<std::size_t>(latents.rows()));
  for (Eigen::Index r = 0; r < latents.rows(); ++r) g.rasters.push_back(argmaxRaster(g.probabilities.row(r), width_, height_));
  return g;
}

Eigen::MatrixXd InfoGanModel::encode(const std::vector<RasterDesign>& rasters) const {
  for (const auto& r : rasters)
    if (r.width != width_ || r.height != height_) throw DimensionMismatch("raster resolution differs from the model");
  if (rasters.empty()) return Eigen::MatrixXd(0, latentDim_);
  return encode(oneHotBatch(rasters));
}

Eigen::MatrixXd InfoGanModel::encode(const Eigen::MatrixXd& encodedRasters) const {
  if (encodedRasters.cols() != width_ * height_ * kClassCount)
    throw DimensionMismatch("raster resolution differs from the model");
  return auxiliary.forward(encodedRasters);
}

Eigen::VectorXd InfoGanModel::discriminate(const Eigen::MatrixXd& encodedRasters) const {
  return discriminator.forward(encodedRasters).col(0);
}

void InfoGanModel::save(const std::filesystem::path& dir, const std::string& sidecarExtra) const {
  std::filesystem::create_directories(dir);
  generator.save(dir / "generator.lfnn");
  discriminator.save(dir / "discriminator.lfnn");
  auxiliary.save(dir / "auxiliary.lfnn");
  std::ofstream out(dir / "model.txt");
  if (!out) throw IoError("cannot write " + (dir / "model.txt").string());
  out << sidecarExtra;
  out << "latent_dim = " << latentDim_ << "\n"
      << "width = " << width_ << "\n"
      << "height = " << height_ << "\n"
      << "trained = " << (trained_ ? 1 : 0) << "\n";
}

InfoGanModel InfoGanModel::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "model.txt");
  if (!in) throw IoError("cannot open " + (dir / "model.txt").string());
  InfoGanModel m;
  std::string line;
  int seen = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "latent_dim") m.latentDim_ = std::stoi(value), ++seen;
      else if (key == "width") m.width_ = std::stoi(value), ++seen;
      else if (key == "height") m.height_ = std::stoi(value), ++seen;
      else if (key == "trained") m.trained_ = std::stoi(value) != 0;
    } catch (const std::exception&) {
      throw FormatError("bad value for " + key + " in model sidecar");
    }
  }
  if (seen != 3) throw FormatError("model sidecar lacks latent_dim/width/height");
  m.generator = nn::DenseNetwork::load(dir / "generator.lfnn");
  m.discriminator = nn::DenseNetwork::load(dir / "discriminator.lfnn");
  m.auxiliary = nn::DenseNetwork::load(dir / "auxiliary.lfnn");
  const int p = m.width_ * m.height_ * kClassCount;
  if (m.generator.inputWidth() != m.latentDim_ || m.generator.outputWidth() != p ||
      m.discriminator.inputWidth() != p || m.auxiliary.inputWidth() != p ||
      m.auxiliary.outputWidth() != m.latentDim_)
    throw FormatError("network checkpoints disagree with the model sidecar");
  return m;
}

std::vector<RasterDesign> probeSet(const std::vector<RasterDesign>& corpus, const InfoGanConfig& cfg) {
  const std::size_t n = corpus.size();
  const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(cfg.probeCount, 1)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng({cfg.seed, 0x9b0be});
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<RasterDesign> probes;
  for (auto i : idx) probes.push_back(corpus[i]);
  return probes;
}

double colorRmse(const std::vector<RasterDesign>& a, const std::vector<RasterDesign>& b) {
  if (a.empty()) throw DomainError("empty probe set");
  if (a.size() != b.size()) throw DimensionMismatch("raster lists differ in length");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].width != b[i].width || a[i].height != b[i].height) throw DimensionMismatch("raster sizes differ");
    for (std::size_t p = 0; p < a[i].classes.size(); ++p) {
      const auto ca = classColor(static_cast<PixelClass>(a[i].classes[p]));
      const auto cb = classColor(static_cast<PixelClass>(b[i].classes[p]));
      for (int k = 0; k < 3; ++k) {
        const double diff = static_cast<double>(ca[k]) - static_cast<double>(cb[k]);
        sum += diff * diff;
      }
      count += 3;
    }
  }
  return std::sqrt(sum / static_cast<double>(count));
}

double reconstructionRmse(const InfoGanModel& model, const std::vector<RasterDesign>& probes) {
  if (probes.empty()) throw DomainError("empty probe set");
  return colorRmse(probes, model.generate(model.encode(probes)).rasters);
}

struct InfoGanTrainer {
  static void markTrained(InfoGanModel& m) { m.trained_ = true; }
};

TrainResult trainInfoGan(const std::vector<RasterDesign>& corpus, const InfoGanConfig& cfg, const TrainLog& log) {
  if (corpus.empty()) throw DomainError("training corpus is empty");
  if (cfg.latentDim < 1) throw DomainError("latent dimension must be positive");
  if (cfg.epochs < 0) throw DomainError("epoch count must be non-negative");
  if (cfg.batchSize < 2) throw DomainError("batch size must be at least 2");
  if (!(cfg.learningRate > 0.0) || !(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0)) throw DomainError("bad optimizer settings");
  if (!(cfg.infoWeight >= 0.0)) throw DomainError("info weight must be non-negative");
  const int w = corpus.front().width;
  const int h = corpus.front().height;
  for (const auto& r : corpus)
    if (r.width != w || r.height != h) throw DimensionMismatch("corpus rasters differ in resolution");

  TrainResult result{InfoGanModel::create(cfg.latentDim, w, h, cfg.seed), {}};
  InfoGanModel& m = result.model;
  InfoGanTrainer::markTrained(m);
  if (cfg.epochs == 0) return result;

  const Eigen::MatrixXd data = oneHotBatch(corpus);
  const std::vector<RasterDesign> probes = probeSet(corpus, cfg);
  const Eigen::Index n = data.rows();
  const Eigen::Index batch = std::min<Eigen::Index>(cfg.batchSize, n);
  const Eigen::Index batchesPerEpoch = std::max<Eigen::Index>(1, n / batch);
  const nn::AdamConfig adam{cfg.learningRate, cfg.beta1, 0.999, 1e-8};
  nn::AdamState stateG, stateD, stateA;
  Rng rng({cfg.seed, 0x7a1});
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  auto diverge = [&](int epoch, const std::string& what) {
    result.history.diverged = true;
    result.history.message = "training diverged at epoch " + std::to_string(epoch) + ": " + what;
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    EpochRecord rec;
    rec.epoch = epoch;
    double correct = 0.0, judged = 0.0, variance = 0.0;
    try {
      for (Eigen::Index b = 0; b < batchesPerEpoch; ++b) {
        Eigen::MatrixXd real(batch, data.cols());
        for (Eigen::Index i = 0; i < batch; ++i) real.row(i) = data.row(order[static_cast<std::size_t>(b * batch + i)]);
        const double bn = static_cast<double>(batch);

        // Discriminator step on a real and a fake batch.
        {
          const Eigen::MatrixXd x = rng.normalMatrix(batch, cfg.latentDim);
          nn::ForwardCache gc;
          const Eigen::MatrixXd fake = pixelSoftmax(m.generator.forward(x, gc));
          nn::ForwardCache rc, fc;
          const Eigen::VectorXd dReal = m.discriminator.forward(real, rc).col(0);
          const Eigen::VectorXd dFake = m.discriminator.forward(fake, fc).col(0);
          const Eigen::ArrayXd pr = dReal.array().max(kProbabilityFloor).min(1.0 - kProbabilityFloor);
          const Eigen::ArrayXd pf = dFake.array().max(kProbabilityFloor).min(1.0 - kProbabilityFloor);
          const double loss = -(pr.log().sum() + (1.0 - pf).log().sum()) / bn;
          if (!finite(loss)) throw NumericFailure("discriminator loss");
          rec.discriminatorLoss += loss;
          correct += static_cast<double>((dReal.array() > 0.5).count() + (dFake.array() < 0.5).count());
          judged += 2.0 * bn;
          rec.minDiscriminatorOutput = std::min({rec.minDiscriminatorOutput, dReal.minCoeff(), dFake.minCoeff()});
          rec.maxDiscriminatorOutput = std::max({rec.maxDiscriminatorOutput, dReal.maxCoeff(), dFake.maxCoeff()});
          const Eigen::MatrixXd gReal = (-1.0 / (bn * pr)).matrix();
          const Eigen::MatrixXd gFake = (1.0 / (bn * (1.0 - pf))).matrix();
          const Eigen::VectorXd grad =
              m.discriminator.backward(rc, gReal).parameters + m.discriminator.backward(fc, gFake).parameters;
          Eigen::VectorXd params = m.discriminator.parameters();
          nn::adamStep(params, grad, stateD, adam);
          m.discriminator.setParameters(params);
        }

        // Generator and auxiliary step.
        {
          const Eigen::MatrixXd x = rng.normalMatrix(batch, cfg.latentDim);
          nn::ForwardCache gc, dc, ac;
          const Eigen::MatrixXd fake = pixelSoftmax(m.generator.forward(x, gc));
          variance += meanPixelVariance(fake);
          const Eigen::VectorXd dFake = m.discriminator.forward(fake, dc).col(0);
          const Eigen::ArrayXd pf = dFake.array().max(kProbabilityFloor).min(1.0 - kProbabilityFloor);
          const double gLoss = -pf.log().sum() / bn;
          const Eigen::MatrixXd code = m.auxiliary.forward(fake, ac);
          const Eigen::MatrixXd residual = code - x;
          const double infoLoss = residual.squaredNorm() / bn;
          if (!finite(gLoss) || !finite(infoLoss)) throw NumericFailure("generator loss");
          rec.generatorLoss += gLoss;
          rec.infoLoss += infoLoss;

          const nn::Gradients gd = m.discriminator.backward(dc, (-1.0 / (bn * pf)).matrix());
          const nn::Gradients ga = m.auxiliary.backward(ac, (2.0 * cfg.infoWeight / bn) * residual);
          const nn::Gradients gg = m.generator.backward(gc, softmaxBackward(fake, gd.input + ga.input));

          Eigen::VectorXd pg = m.generator.parameters();
          Eigen::VectorXd pa = m.auxiliary.parameters();
          nn::adamStep(pg, gg.parameters, stateG, adam);
          nn::adamStep(pa, ga.parameters, stateA, adam);
          m.generator.setParameters(pg);
          m.auxiliary.setParameters(pa);
        }
      }
      const double nb = static_cast<double>(batchesPerEpoch);
      rec.discriminatorLoss /= nb;
      rec.generatorLoss /= nb;
      rec.infoLoss /= nb;
      rec.discriminatorAccuracy = correct / judged;
      rec.modeCollapseWarning = variance / nb < cfg.modeCollapseVariance;
      rec.probeRmse = reconstructionRmse(m, probes);
    } catch (const NumericFailure& e) {
      diverge(epoch, e.what());
      return result;
    }
    result.history.epochs.push_back(rec);
    if (log) log(rec);
  }
  return result;
}

std::vector<SweepRow> latentDimSweep(const std::vector<RasterDesign>& corpus, const std::vector<int>& dims,
                                     const InfoGanConfig& cfg) {
  if (dims.empty()) throw DomainError("latent dimension sweep needs at least one dimension");
  if (std::set<int>(dims.begin(), dims.end()).size() != dims.size()) throw DomainError("duplicate latent dimension");
  std::vector<SweepRow> rows;
  for (int d : dims) {
    InfoGanConfig c = cfg;
    c.latentDim = d;
    auto trained = trainInfoGan(corpus, c);
    if (trained.history.diverged) throw NumericFailure(trained.history.message);
    rows.push_back({d, reconstructionRmse(trained.model, probeSet(corpus, c)), false});
  }
  auto best = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.rmse < b.rmse; });
  best->selected = true;
  return rows;
}

void writeHistoryCsv(std::ostream& out, const TrainHistory& history) {
  out << "epoch,d_loss,g_loss,info_loss,probe_rmse\n";
  std::ostringstream line;
  line.precision(10);
  for (const auto& e : history.epochs)
    line << e.epoch << ',' << e.discriminatorLoss << ',' << e.generatorLoss << ',' << e.infoLoss << ','
         << e.probeRmse << '\n';
  out << line.str();
}

}  // namespace latentflow
