#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "latentflow/gp.hpp"
#include "latentflow/sobol.hpp"

namespace latentflow {

inline constexpr double kLatentRadius = 2.0;

/// Sobol points mapped to [-radius, radius]^d, keeping those with norm <= radius.
class SobolBallSampler {
public:
  SobolBallSampler(int dimension, double radius, std::uint64_t seed);
  /// Next accepted point; throws NumericFailure after maxCandidates rejected draws in a row.
  Eigen::VectorXd next(long maxCandidates = 10'000'000);
  /// Draws one raw candidate; returns it when accepted.
  std::optional<Eigen::VectorXd> tryNext();
  long candidates() const { return candidates_; }
  long accepted() const { return accepted_; }

private:
  SobolSequence sobol_;
  double radius_;
  long candidates_ = 0;
  long accepted_ = 0;
};

/// n x d design of Sobol points inside the ball of the given radius.
Eigen::MatrixXd sobolBallDoe(int d, int n, double radius, std::uint64_t seed);

/// Scales x back onto the ball when it lies outside (exactly satisfying the bound).
Eigen::VectorXd projectToBall(const Eigen::VectorXd& x, double radius);

/// Reference point: componentwise max plus 10% of the componentwise span.
Eigen::VectorXd referencePoint(const Eigen::MatrixXd& Y);

/// Monte-Carlo expected hypervolume improvement with common random numbers: the
/// same standard-normal draws are reused for every x0, so the estimate is a
/// deterministic function of x0.
class EhviAcquisition {
public:
  EhviAcquisition(const std::vector<GpModel>& models, const Eigen::MatrixXd& archive, const Eigen::VectorXd& reference,
                  int samples, std::uint64_t seed);
  double operator()(const Eigen::VectorXd& x0) const;
  /// The same estimator for a given posterior mean and standard deviation.
  double fromMoments(const Eigen::VectorXd& mean, const Eigen::VectorXd& sd) const;

private:
  const std::vector<GpModel>* models_;
  Eigen::MatrixXd archive_;
  Eigen::VectorXd reference_;
  Eigen::MatrixXd normals_;  ///< samples x q
};

double ehvi(const std::vector<GpModel>& models, const Eigen::VectorXd& x0, const Eigen::MatrixXd& archive,
            const Eigen::VectorXd& reference, int samples, std::uint64_t seed);

struct ProposeOptions {
  int batchSize = 5;
  int restarts = 32;
  int mcSamples = 256;
  double radius = kLatentRadius;
  std::uint64_t seed = 1;
  int maxEvaluationsPerStart = 400;
};

struct Proposal {
  Eigen::MatrixXd points;           ///< batchSize x d
  std::vector<double> acquisition;  ///< EHVI of each pick at the time it was chosen
  bool converged = true;            ///< false when a pick found no EHVI above 1e-12
};

/// Kriging-believer batch: maximize EHVI in the ball, then treat the posterior mean at
/// the pick as observed (hyperparameters frozen) and repeat.
Proposal proposeBatch(std::vector<GpModel> models, const Eigen::MatrixXd& archive, const Eigen::VectorXd& reference,
                      const ProposeOptions& options);

/// Maps a batch of latents to objective vectors; a failed evaluation is nullopt.
using Evaluator = std::function<std::vector<std::optional<Eigen::VectorXd>>(const Eigen::MatrixXd&)>;

struct LoopConfig {
  int latentDim = 8;
  int initial = 20;
  int batches = 3;
  int batchSize = 5;
  int mcSamples = 256;
  int restarts = 32;
  int gpRestarts = 8;
  double radius = kLatentRadius;
  std::uint64_t seed = 1;
};

struct EvaluationRecord {
  int id = 0;
  int batch = 0;  ///< 0 for the initial design
  Eigen::VectorXd x;
  std::optional<Eigen::VectorXd> y;
};

struct BatchRecord {
  int batch = 0;
  std::vector<int> ids;
  std::vector<double> acquisition;
  std::vector<int> archiveIds;  ///< evaluation ids on the Pareto front after this batch
  double hypervolume = 0.0;
  bool converged = true;
};

struct OptimizationHistory {
  std::vector<EvaluationRecord> evaluations;
  std::vector<BatchRecord> batches;
  Eigen::VectorXd reference;
  bool aborted = false;
  std::string message;

  /// Successful objective rows (and their ids) lying strictly inside the reference box.
  Eigen::MatrixXd insideObjectives(std::vector<int>* ids = nullptr) const;
  double finalHypervolume() const { return batches.empty() ? 0.0 : batches.back().hypervolume; }
};

using LoopLog = std::function<void(const BatchRecord&)>;

/// Initial design, then `batches` rounds of fit -> propose -> evaluate.
OptimizationHistory runLoop(const Evaluator& evaluator, const LoopConfig& cfg, const LoopLog& log = {});

/// Hypervolume of an equal-budget pure Sobol-ball design scored against `reference`.
double sobolBaselineHypervolume(const Evaluator& evaluator, const LoopConfig& cfg, const Eigen::VectorXd& reference);

void writeHistoryCsv(std::ostream& out, const OptimizationHistory& history);
void writeParetoCsv(std::ostream& out, const OptimizationHistory& history);
void writeAcquisitionCsv(std::ostream& out, const OptimizationHistory& history);
std::string frontierSvg(const OptimizationHistory& history, const std::string& xLabel, const std::string& yLabel);

}  // namespace latentflow
