#include "latentflow/gp.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "latentflow/errors.hpp"
#include "latentflow/rng.hpp"

namespace latentflow {

namespace {

const double kLogVarianceMin = std::log(1e-8);
const double kLogVarianceMax = std::log(1e6);
constexpr double kMeanBound = 1e3;

bool factorize(const Eigen::MatrixXd& c, double jitter, Eigen::LLT<Eigen::MatrixXd>& llt) {
  Eigen::MatrixXd k = c;
  k.diagonal().array() += jitter;
  llt.compute(k);
  if (llt.info() != Eigen::Success) return false;
  const Eigen::VectorXd d = llt.matrixLLT().diagonal();
  return d.allFinite() && d.minCoeff() > 0.0;
}

// Factorizes C + jitter*I, escalating jitter 10x up to the ceiling.
double factorizeEscalating(const Eigen::MatrixXd& c, double jitter, double ceiling, Eigen::LLT<Eigen::MatrixXd>& llt) {
  double j = std::max(jitter, kMinJitter);
  for (;;) {
    if (factorize(c, j, llt)) return j;
    if (j >= ceiling * (1.0 - 1e-12)) break;
    j = std::min(j * 10.0, ceiling);
  }
  throw NumericFailure("covariance factorization failed even with jitter " + std::to_string(j));
}

void clampHyper(GpHyper& h) {
  h.omega = h.omega.cwiseMax(-kOmegaBound).cwiseMin(kOmegaBound);
  h.logVariance = std::clamp(h.logVariance, kLogVarianceMin, kLogVarianceMax);
  h.mean = std::clamp(h.mean, -kMeanBound, kMeanBound);
}

Eigen::VectorXd pack(const GpHyper& h) {
  Eigen::VectorXd t(h.omega.size() + 2);
  t << h.omega, h.logVariance, h.mean;
  return t;
}

GpHyper unpack(const Eigen::VectorXd& t, double jitter) {
  GpHyper h;
  const Eigen::Index d = t.size() - 2;
  h.omega = t.head(d);
  h.logVariance = t(d);
  h.mean = t(d + 1);
  h.jitter = jitter;
  clampHyper(h);
  return h;
}

}  // namespace

double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const GpHyper& hyper) {
  if (a.size() != b.size() || a.size() != hyper.omega.size()) throw DimensionMismatch("kernel input dimensions");
  return squaredExponential(a, b, hyper.omega, hyper.variance());
}

Eigen::MatrixXd covarianceMatrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const GpHyper& hyper) {
  if (A.cols() != hyper.omega.size() || B.cols() != hyper.omega.size())
    throw DimensionMismatch("kernel input dimensions");
  const Eigen::ArrayXd w = Eigen::pow(10.0, hyper.omega.array());
  const double s2 = hyper.variance();
  Eigen::MatrixXd c(A.rows(), B.rows());
  for (Eigen::Index j = 0; j < B.rows(); ++j)
    for (Eigen::Index i = 0; i < A.rows(); ++i)
      c(i, j) = s2 * std::exp(-((A.row(i) - B.row(j)).array().square().transpose() * w).sum());
  return c;
}

Evidence logMarginalLikelihood(const GpHyper& hyper, const Eigen::MatrixXd& X, const Eigen::VectorXd& Y) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n < 1 || Y.size() != n) throw DimensionMismatch("training inputs and outputs differ in length");
  if (hyper.omega.size() != d) throw DimensionMismatch("omega length differs from input dimension");
  const Eigen::MatrixXd c = covarianceMatrix(X, X, hyper);
  Eigen::LLT<Eigen::MatrixXd> llt;
  Evidence ev;
  ev.jitter = factorizeEscalating(c, hyper.jitter, kMaxJitter, llt);
  const Eigen::VectorXd r = Y.array() - hyper.mean;
  const Eigen::VectorXd alpha = llt.solve(r);
  const double logDet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  ev.value = -0.5 * r.dot(alpha) - 0.5 * logDet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  const Eigen::MatrixXd kInv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd w = alpha * alpha.transpose() - kInv;  // d value = 0.5 tr(W dK)
  ev.gradient.resize(d + 2);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double scale = -std::log(10.0) * std::pow(10.0, hyper.omega(j));
    double g = 0.0;
    for (Eigen::Index b = 0; b < n; ++b)
      for (Eigen::Index a = 0; a < n; ++a) {
        const double diff = X(a, j) - X(b, j);
        g += w(a, b) * c(a, b) * scale * diff * diff;
      }
    ev.gradient(j) = 0.5 * g;
  }
  ev.gradient(d) = 0.5 * (w.array() * c.array()).sum();
  ev.gradient(d + 1) = alpha.sum();
  return ev;
}

GpModel::GpModel(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const GpHyper& hyper, bool standardize)
    : hyper_(hyper), X_(X), Y_(Y) {
  if (X.rows() < 1 || Y.size() != X.rows()) throw DimensionMismatch("training inputs and outputs differ in length");
  if (hyper.omega.size() != X.cols()) throw DimensionMismatch("omega length differs from input dimension");
  if (!X.allFinite() || !Y.allFinite()) throw DomainError("training data must be finite");
  if (standardize) {
    offset_ = Y.mean();
    const double sd = std::sqrt((Y.array() - offset_).square().mean());
    scale_ = sd > 1e-12 * std::max(1.0, std::abs(offset_)) ? sd : 1.0;
  }
  condition();
}

void GpModel::condition() {
  const Eigen::MatrixXd c = covarianceMatrix(X_, X_, hyper_);
  hyper_.jitter = factorizeEscalating(c, hyper_.jitter, kMaxJitter, llt_);
  const Eigen::VectorXd z = (Y_.array() - offset_) / scale_ - hyper_.mean;
  alpha_ = llt_.solve(z);
  const double logDet = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  const double n = static_cast<double>(X_.rows());
  // Evidence of the original-unit data: standardized evidence minus n log(scale).
  logEvidence_ = -0.5 * z.dot(alpha_) - 0.5 * logDet - 0.5 * n * std::log(2.0 * std::numbers::pi) - n * std::log(scale_);
}

Prediction GpModel::predict(const Eigen::MatrixXd& X0) const {
  if (X0.cols() != X_.cols()) throw DimensionMismatch("prediction input dimension");
  const Eigen::MatrixXd k0 = covarianceMatrix(X_, X0, hyper_);  // n x m
  Prediction p;
  p.mean = (hyper_.mean + (k0.transpose() * alpha_).array()) * scale_ + offset_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(k0);
  p.variance = ((hyper_.variance() + hyper_.jitter) - v.colwise().squaredNorm().transpose().array()).max(0.0) *
               (scale_ * scale_);
  return p;
}

Eigen::MatrixXd GpModel::posteriorCovariance(const Eigen::MatrixXd& X0) const {
  if (X0.cols() != X_.cols()) throw DimensionMismatch("prediction input dimension");
  const Eigen::MatrixXd k0 = covarianceMatrix(X_, X0, hyper_);
  const Eigen::MatrixXd v = llt_.matrixL().solve(k0);
  Eigen::MatrixXd cov = covarianceMatrix(X0, X0, hyper_);
  cov.noalias() -= v.transpose() * v;
  cov.diagonal().array() += hyper_.jitter;
  cov = 0.5 * (cov + cov.transpose());
  return cov * (scale_ * scale_);
}

GpModel GpModel::withObservation(const Eigen::VectorXd& x, double y) const {
  if (x.size() != X_.cols()) throw DimensionMismatch("observation dimension");
  GpModel m;
  m.hyper_ = hyper_;
  m.offset_ = offset_;
  m.scale_ = scale_;
  m.X_.resize(X_.rows() + 1, X_.cols());
  m.X_ << X_, x.transpose();
  m.Y_.resize(Y_.size() + 1);
  m.Y_ << Y_, y;
  m.condition();
  return m;
}

void GpModel::save(std::ostream& out) const {
  out.precision(17);
  out << "gp " << X_.rows() << ' ' << X_.cols() << '\n';
  out << "omega";
  for (Eigen::Index j = 0; j < hyper_.omega.size(); ++j) out << ' ' << hyper_.omega(j);
  out << "\nlog_variance " << hyper_.logVariance << "\nmean " << hyper_.mean << "\njitter " << hyper_.jitter
      << "\noffset " << offset_ << "\nscale " << scale_ << '\n';
  for (Eigen::Index i = 0; i < X_.rows(); ++i) {
    for (Eigen::Index j = 0; j < X_.cols(); ++j) out << X_(i, j) << ' ';
    out << Y_(i) << '\n';
  }
  if (!out) throw IoError("failed writing GP model");
}

GpModel GpModel::load(std::istream& in) {
  auto expect = [&](const char* word) {
    std::string w;
    if (!(in >> w) || w != word) throw FormatError(std::string("GP dump: expected ") + word);
  };
  GpModel m;
  Eigen::Index n = 0, d = 0;
  expect("gp");
  if (!(in >> n >> d) || n < 1 || d < 1) throw FormatError("GP dump: bad shape");
  expect("omega");
  m.hyper_.omega.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) in >> m.hyper_.omega(j);
  expect("log_variance");
  in >> m.hyper_.logVariance;
  expect("mean");
  in >> m.hyper_.mean;
  expect("jitter");
  in >> m.hyper_.jitter;
  expect("offset");
  in >> m.offset_;
  expect("scale");
  in >> m.scale_;
  m.X_.resize(n, d);
  m.Y_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) in >> m.X_(i, j);
    in >> m.Y_(i);
  }
  if (!in) throw FormatError("GP dump truncated");
  m.condition();
  return m;
}

GpModel fitGp(const Eigen::MatrixXd& X, const Eigen::VectorXd& Y, const GpFitOptions& options) {
  if (X.rows() < 2) throw DomainError("GP fitting needs at least two observations");
  if (Y.size() != X.rows()) throw DimensionMismatch("training inputs and outputs differ in length");
  if (options.restarts < 1) throw DomainError("need at least one restart");
  // Standardize once; evidence comparisons happen in standardized units.
  const GpHyper probe{Eigen::VectorXd::Zero(X.cols()), 0.0, 0.0, kMinJitter};
  const GpModel scaled(X, Y, probe);
  const Eigen::VectorXd z = (Y.array() - scaled.outputOffset()) / scaled.outputScale();

  bool found = false;
  GpHyper best;
  double bestValue = -std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < options.restarts; ++restart) {
    Rng rng({options.seed, 0x6f17ULL, static_cast<std::uint64_t>(restart)});
    GpHyper h;
    h.omega.resize(X.cols());
    for (Eigen::Index j = 0; j < h.omega.size(); ++j) h.omega(j) = rng.uniform(-2.0, 2.0);
    h.logVariance = 0.0;
    h.mean = 0.0;
    try {
      Evidence ev = logMarginalLikelihood(h, X, z);
      double step = 0.1;
      for (int it = 0; it < options.maxIterations && step > 1e-12; ++it) {
        bool accepted = false;
        while (step > 1e-12) {
          const GpHyper trial = unpack(pack(h) + step * ev.gradient, h.jitter);
          Evidence tv;
          try {
            tv = logMarginalLikelihood(trial, X, z);
          } catch (const NumericFailure&) {
            step *= 0.5;
            continue;
          }
          if (tv.value > ev.value) {
            const double gain = tv.value - ev.value;
            h = trial;
            ev = tv;
            step *= 2.0;
            accepted = true;
            if (gain < 1e-10 * (1.0 + std::abs(ev.value))) step = 0.0;
            break;
          }
          step *= 0.5;
        }
        if (!accepted) break;
      }
      if (std::isfinite(ev.value) && ev.value > bestValue) {
        bestValue = ev.value;
        best = h;
        found = true;
      }
    } catch (const NumericFailure&) {
      continue;
    }
  }
  if (!found) throw NumericFailure("every GP fitting restart failed");
  return GpModel(X, Y, best);
}

std::vector<Eigen::MatrixXd> samplePosterior(const std::vector<GpModel>& models, const Eigen::MatrixXd& Xcan, int N,
                                             std::uint64_t seed) {
  if (N < 1) throw DomainError("need at least one posterior draw");
  std::vector<Eigen::MatrixXd> draws;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const GpModel& model = models[k];
    if (model.dimension() != Xcan.cols()) throw DimensionMismatch("candidate dimension differs from model");
    const Eigen::VectorXd mean = model.predict(Xcan).mean;
    const Eigen::MatrixXd cov = model.posteriorCovariance(Xcan);
    Eigen::LLT<Eigen::MatrixXd> llt;
    // The posterior covariance already carries the model jitter; escalate beyond it if needed.
    if (!factorize(cov, 0.0, llt)) {
      const double base = model.jitterVariance();
      factorizeEscalating(cov, base, std::max(model.priorVariance() * 1e-2, base), llt);
    }
    Rng rng({seed, 0x5a3b1eULL, static_cast<std::uint64_t>(k)});
    const Eigen::MatrixXd z = rng.normalMatrix(Xcan.rows(), N);
    Eigen::MatrixXd y = llt.matrixL() * z;  // m x N
    y.colwise() += mean;
    draws.push_back(y.transpose());
  }
  return draws;
}

}  // namespace latentflow
