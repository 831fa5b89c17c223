#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentflow/gp.hpp"

namespace latentflow {

struct ParetoProbability {
  Eigen::MatrixXd candidates;  ///< m x d
  Eigen::VectorXd probs;       ///< share of draws in which each candidate is non-dominated
  int draws = 0;
  std::uint64_t seed = 0;
  long frontMembers = 0;  ///< sum over draws of the Pareto-set size (>= draws)
};

/// Probability of Pareto optimality from joint draws: draws[k] is N x m for objective k.
ParetoProbability paretoProbabilityFromDraws(const std::vector<Eigen::MatrixXd>& draws);

/// Joint posterior draws over all candidates (one independent GP per objective).
/// Candidates are processed in a content-sorted order so that permuting them
/// permutes the probabilities identically.
ParetoProbability paretoProbability(const std::vector<GpModel>& models, const Eigen::MatrixXd& Xcan, int N,
                                    std::uint64_t seed);

/// Independent Gaussian objectives per candidate: means and sds are m x q.
ParetoProbability paretoProbabilityGaussian(const Eigen::MatrixXd& means, const Eigen::MatrixXd& sds, int N,
                                            std::uint64_t seed);

struct MarginalHistogram {
  int dimension = 0;
  double lower = -2.0;
  double upper = 2.0;
  Eigen::VectorXd mass;  ///< sums to 1
  double skewness = 0.0;  ///< probability-weighted skewness of the coordinate
  bool uniformFallback = false;  ///< every probability was zero; candidates weighted equally
};

/// Probability-weighted histogram of each latent coordinate over [lower, upper].
std::vector<MarginalHistogram> marginalHistograms(const ParetoProbability& pp, int bins, double lower = -2.0,
                                                  double upper = 2.0);

double weightedSkewness(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

void writeProbabilityCsv(std::ostream& out, const ParetoProbability& pp);
void writeHistogramCsv(std::ostream& out, const std::vector<MarginalHistogram>& hists);
/// Bar chart of one marginal.
std::string marginalSvg(const MarginalHistogram& hist);

}  // namespace latentflow
