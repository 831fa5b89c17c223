#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace latentflow {

inline constexpr double kMinJitter = 1e-8;
inline constexpr double kMaxJitter = 1e-4;
inline constexpr double kOmegaBound = 6.0;

/// Squared-exponential covariance variance * exp(-sum_j 10^omega_j (a_j - b_j)^2).
template <typename DerivedA, typename DerivedB, typename DerivedW>
typename DerivedA::Scalar squaredExponential(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                                             const Eigen::MatrixBase<DerivedW>& omega,
                                             typename DerivedA::Scalar variance) {
  using std::exp;
  using std::pow;
  typename DerivedA::Scalar s{0};
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const auto d = a(j) - b(j);
    s += pow(typename DerivedA::Scalar{10}, omega(j)) * d * d;
  }
  return variance * exp(-s);
}

/// Kernel hyperparameters. Stored in the standardized output units used during fitting.
struct GpHyper {
  Eigen::VectorXd omega;     ///< log10 inverse squared length scales
  double logVariance = 0.0;  ///< log sigma^2
  double mean = 0.0;         ///< constant prior mean mu0
  double jitter = kMinJitter;

  double variance() const { return std::exp(logVariance); }
};

double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const GpHyper& hyper);
/// Cross-covariance matrix between the rows of A and the rows of B (no jitter).
Eigen::MatrixXd covarianceMatrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const GpHyper& hyper);

struct Evidence {
  double value = 0.0;
  Eigen::VectorXd gradient;  ///< d value / d (omega..., log sigma^2, mu0)
  double jitter = kMinJitter;  ///< jitter actually used after escalation
};

/// Log marginal likelihood of Y under the GP prior, with analytic gradient. A failed
/// factorization escalates the jitter by 10x up to 1e-4 before throwing NumericFailure.
Evidence logMarginalLikelihood(const GpHyper& hyper, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Fitted Gaussian process for one objective. Outputs are standardized internally;
/// every public quantity is in original units.
class GpModel {
public:
  /// Conditions on (X, Y) with fixed hyperparameters (standardized units).
  /// standardize=false keeps Y in its own units (offset 0, scale 1).
  GpModel(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const GpHyper& hyper, bool standardize = true);

  const GpHyper& hyper() const { return hyper_; }
  const Eigen::MatrixXd& inputs() const { return X_; }
  const Eigen::VectorXd& outputs() const { return Y_; }
  int dimension() const { return static_cast<int>(X_.cols()); }
  double outputOffset() const { return offset_; }
  double outputScale() const { return scale_; }
  double logEvidence() const { return logEvidence_; }

  /// Process variance and prior mean in original units.
  double priorVariance() const { return hyper_.variance() * scale_ * scale_; }
  double priorMean() const { return offset_ + scale_ * hyper_.mean; }
  double jitterVariance() const { return hyper_.jitter * scale_ * scale_; }

  double standardize(double y) const { return (y - offset_) / scale_; }
  double unstandardize(double z) const { return offset_ + scale_ * z; }

  Prediction predict(const Eigen::MatrixXd& X0) const;
  /// Full posterior covariance over the rows of X0 (original units, jitter on the diagonal).
  Eigen::MatrixXd posteriorCovariance(const Eigen::MatrixXd& X0) const;

  /// Same hyperparameters and output scaling, one extra observation.
  GpModel withObservation(const Eigen::VectorXd& x, double y) const;

  void save(std::ostream& out) const;
  static GpModel load(std::istream& in);

private:
  GpModel() = default;
  void condition();

  GpHyper hyper_;
  Eigen::MatrixXd X_;
  Eigen::VectorXd Y_;
  double offset_ = 0.0;
  double scale_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double logEvidence_ = 0.0;
};

struct GpFitOptions {
  int restarts = 8;
  std::uint64_t seed = 1;
  int maxIterations = 400;
};

/// Multi-start projected gradient ascent on the log evidence; the best restart wins.
GpModel fitGp(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const GpFitOptions& options = {});

/// Joint posterior draws: result[k] is N x m, draw rows for objective k over the m
/// candidate rows of Xcan. Objectives are drawn independently.
std::vector<Eigen::MatrixXd> samplePosterior(const std::vector<GpModel>& models, const Eigen::MatrixXd& Xcan, int N,
                                             std::uint64_t seed);

}  // namespace latentflow
