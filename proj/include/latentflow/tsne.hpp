#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace latentflow {

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  int exaggerationIterations = 250;
  double exaggeration = 12.0;
  double learningRate = 0.0;  ///< 0 selects n / 12
  std::uint64_t seed = 1;
};

struct Embedding2D {
  Eigen::MatrixXd points;  ///< n x 2
  std::vector<int> labels;
  std::vector<double> klHistory;  ///< KL(P || Q) after each iteration, unexaggerated P
};

/// Conditional affinities P(j|i) (row i sums to 1) with per-row Gaussian bandwidths
/// bisected so that each row's entropy equals log(perplexity).
Eigen::MatrixXd conditionalAffinities(const Eigen::MatrixXd& points, double perplexity);

/// Shannon entropy (natural log) of one probability row, zero entries ignored.
double rowEntropy(const Eigen::Ref<const Eigen::RowVectorXd>& row);

/// Exact t-SNE. The computation runs on a content-sorted copy of the input and the
/// initial position of each point is keyed by its coordinates, so permuting the
/// input permutes the output identically.
Embedding2D tsneEmbed(const Eigen::MatrixXd& latents, const std::vector<int>& labels, const TsneConfig& cfg = {});

/// Scatter plot with one marker per point, colored by label, plus a legend.
void emitScatterSvg(const Embedding2D& emb, const std::vector<std::string>& labelNames,
                    const std::filesystem::path& path);
std::string scatterSvg(const Embedding2D& emb, const std::vector<std::string>& labelNames);

void writeEmbeddingCsv(std::ostream& out, const Embedding2D& emb, const std::vector<std::string>& labelNames);

}  // namespace latentflow
