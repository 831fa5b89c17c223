#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentflow/nn.hpp"
#include "latentflow/raster.hpp"

namespace latentflow {

struct InfoGanConfig {
  int latentDim = 8;
  int epochs = 10000;
  int batchSize = 64;
  double learningRate = 2e-4;
  double beta1 = 0.5;
  double infoWeight = 1.0;  ///< lambda on the code-reconstruction term
  std::uint64_t seed = 1;
  int probeCount = 32;                   ///< held-out rasters scored every epoch
  double modeCollapseVariance = 1e-4;    ///< warn when generated pixel variance drops below this
};

struct EpochRecord {
  int epoch = 0;
  double discriminatorLoss = 0.0;
  double generatorLoss = 0.0;
  double infoLoss = 0.0;
  double probeRmse = 0.0;
  double discriminatorAccuracy = 0.0;  ///< share of real scored > 0.5 and fake scored < 0.5
  double minDiscriminatorOutput = 1.0;
  double maxDiscriminatorOutput = 0.0;
  bool modeCollapseWarning = false;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  bool diverged = false;
  std::string message;
};

/// Generator, discriminator and auxiliary encoder over one raster resolution.
class InfoGanModel {
public:
  static InfoGanModel create(int latentDim, int width, int height, std::uint64_t seed);

  struct Generated {
    Eigen::MatrixXd probabilities;  ///< one row per latent; per-pixel softmax over 3 classes
    std::vector<RasterDesign> rasters;
    int overNorm = 0;  ///< latents with norm above 2 (generated anyway)
  };

  /// EVAL-mode generation. Throws Error when the model never went through train().
  Generated generate(const Eigen::MatrixXd& latents) const;
  Eigen::MatrixXd encode(const std::vector<RasterDesign>& rasters) const;
  Eigen::MatrixXd encode(const Eigen::MatrixXd& encodedRasters) const;
  Eigen::VectorXd discriminate(const Eigen::MatrixXd& encodedRasters) const;

  int latentDim() const { return latentDim_; }
  int width() const { return width_; }
  int height() const { return height_; }
  bool trained() const { return trained_; }

  nn::DenseNetwork generator;
  nn::DenseNetwork discriminator;
  nn::DenseNetwork auxiliary;

  /// Writes generator.lfnn, discriminator.lfnn, auxiliary.lfnn and model.txt into dir.
  void save(const std::filesystem::path& dir, const std::string& sidecarExtra = {}) const;
  static InfoGanModel load(const std::filesystem::path& dir);

private:
  friend struct InfoGanTrainer;
  int latentDim_ = 0;
  int width_ = 0;
  int height_ = 0;
  bool trained_ = false;
};

/// Per-pixel softmax over consecutive channel triples.
Eigen::MatrixXd pixelSoftmax(const Eigen::MatrixXd& logits);

struct TrainResult {
  InfoGanModel model;
  TrainHistory history;
};

using TrainLog = std::function<void(const EpochRecord&)>;

/// Alternating adversarial training with a code-reconstruction term. A non-finite
/// loss stops training; the partial history is returned with diverged set.
TrainResult trainInfoGan(const std::vector<RasterDesign>& corpus, const InfoGanConfig& cfg,
                         const TrainLog& log = {});

/// Probe rasters the trainer scores each epoch (a seeded subset of the corpus).
std::vector<RasterDesign> probeSet(const std::vector<RasterDesign>& corpus, const InfoGanConfig& cfg);

/// RMSE between the 0..255 color renderings of two equally sized raster lists.
double colorRmse(const std::vector<RasterDesign>& a, const std::vector<RasterDesign>& b);

/// RMSE between probes and generate(encode(probes)), hard classes rendered as colors.
double reconstructionRmse(const InfoGanModel& model, const std::vector<RasterDesign>& probes);

struct SweepRow {
  int latentDim = 0;
  double rmse = 0.0;
  bool selected = false;
};

/// Trains one model per latent dimension and marks the lowest-RMSE row.
std::vector<SweepRow> latentDimSweep(const std::vector<RasterDesign>& corpus, const std::vector<int>& dims,
                                     const InfoGanConfig& cfg);

void writeHistoryCsv(std::ostream& out, const TrainHistory& history);

}  // namespace latentflow
