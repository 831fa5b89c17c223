#include "latentflow/interpret.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "latentflow/errors.hpp"
#include "latentflow/pareto.hpp"
#include "latentflow/rng.hpp"
#include "latentflow/svg.hpp"

namespace latentflow {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ParetoProbability paretoProbabilityFromDraws(const std::vector<Eigen::MatrixXd>& draws) {
  if (draws.empty()) throw DomainError("need at least one objective");
  const Eigen::Index N = draws.front().rows();
  const Eigen::Index m = draws.front().cols();
  for (const auto& d : draws)
    if (d.rows() != N || d.cols() != m) throw DimensionMismatch("draw matrices differ in shape");
  ParetoProbability pp;
  pp.draws = static_cast<int>(N);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd Y(m, static_cast<Eigen::Index>(draws.size()));
  for (Eigen::Index s = 0; s < N; ++s) {
    for (std::size_t k = 0; k < draws.size(); ++k) Y.col(static_cast<Eigen::Index>(k)) = draws[k].row(s).transpose();
    const auto front = paretoFilter(Y);
    pp.frontMembers += static_cast<long>(front.size());
    for (Eigen::Index i : front) counts(i) += 1.0;
  }
  pp.probs = counts / static_cast<double>(std::max<Eigen::Index>(N, 1));
  return pp;
}

ParetoProbability paretoProbability(const std::vector<GpModel>& models, const Eigen::MatrixXd& Xcan, int N,
                                    std::uint64_t seed) {
  if (Xcan.rows() < 2) throw DomainError("need at least two candidates");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(Xcan.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < Xcan.cols(); ++j) {
      if (Xcan(a, j) < Xcan(b, j)) return true;
      if (Xcan(a, j) > Xcan(b, j)) return false;
    }
    return false;
  });
  Eigen::MatrixXd sorted(Xcan.rows(), Xcan.cols());
  for (Eigen::Index i = 0; i < Xcan.rows(); ++i) sorted.row(i) = Xcan.row(order[static_cast<std::size_t>(i)]);
  const ParetoProbability inner = paretoProbabilityFromDraws(samplePosterior(models, sorted, N, seed));
  ParetoProbability pp;
  pp.candidates = Xcan;
  pp.draws = N;
  pp.seed = seed;
  pp.frontMembers = inner.frontMembers;
  pp.probs.resize(Xcan.rows());
  for (Eigen::Index i = 0; i < Xcan.rows(); ++i) pp.probs(order[static_cast<std::size_t>(i)]) = inner.probs(i);
  return pp;
}

ParetoProbability paretoProbabilityGaussian(const Eigen::MatrixXd& means, const Eigen::MatrixXd& sds, int N,
                                            std::uint64_t seed) {
  if (means.rows() != sds.rows() || means.cols() != sds.cols()) throw DimensionMismatch("means and sds differ");
  if (N < 1) throw DomainError("need at least one draw");
  std::vector<Eigen::MatrixXd> draws;
  for (Eigen::Index k = 0; k < means.cols(); ++k) {
    Rng rng({seed, 0x6a55ULL, static_cast<std::uint64_t>(k)});
    Eigen::MatrixXd d = rng.normalMatrix(N, means.rows());
    for (Eigen::Index i = 0; i < means.rows(); ++i) d.col(i) = (d.col(i) * sds(i, k)).array() + means(i, k);
    draws.push_back(std::move(d));
  }
  ParetoProbability pp = paretoProbabilityFromDraws(draws);
  pp.seed = seed;
  return pp;
}

double weightedSkewness(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  const double w = weights.sum();
  if (!(w > 0.0)) throw DomainError("weights must have positive total");
  const double mean = values.dot(weights) / w;
  const Eigen::ArrayXd c = values.array() - mean;
  const double m2 = (weights.array() * c.square()).sum() / w;
  const double m3 = (weights.array() * c.cube()).sum() / w;
  return m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
}

std::vector<MarginalHistogram> marginalHistograms(const ParetoProbability& pp, int bins, double lower, double upper) {
  if (bins < 2) throw DomainError("need at least two bins");
  if (!(upper > lower)) throw DomainError("histogram range is empty");
  if (pp.candidates.rows() != pp.probs.size()) throw DimensionMismatch("candidates and probabilities differ");
  Eigen::VectorXd weights = pp.probs;
  bool fallback = false;
  if (!(weights.sum() > 0.0)) {
    weights = Eigen::VectorXd::Ones(pp.probs.size());
    fallback = true;
  }
  const double total = weights.sum();
  std::vector<MarginalHistogram> out;
  for (Eigen::Index j = 0; j < pp.candidates.cols(); ++j) {
    MarginalHistogram h;
    h.dimension = static_cast<int>(j);
    h.lower = lower;
    h.upper = upper;
    h.uniformFallback = fallback;
    h.mass = Eigen::VectorXd::Zero(bins);
    for (Eigen::Index i = 0; i < pp.candidates.rows(); ++i) {
      const double t = (pp.candidates(i, j) - lower) / (upper - lower);
      const int b = std::clamp(static_cast<int>(std::floor(t * bins)), 0, bins - 1);
      h.mass(b) += weights(i);
    }
    h.mass /= total;
    h.skewness = weightedSkewness(pp.candidates.col(j), weights);
    out.push_back(std::move(h));
  }
  return out;
}

void writeProbabilityCsv(std::ostream& out, const ParetoProbability& pp) {
  out << "candidate";
  for (Eigen::Index j = 0; j < pp.candidates.cols(); ++j) out << ",x" << j;
  out << ",probability\n";
  for (Eigen::Index i = 0; i < pp.candidates.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < pp.candidates.cols(); ++j) out << ',' << fmt(pp.candidates(i, j));
    out << ',' << fmt(pp.probs(i)) << '\n';
  }
}

void writeHistogramCsv(std::ostream& out, const std::vector<MarginalHistogram>& hists) {
  out << "dimension,bin,lower,upper,mass\n";
  for (const auto& h : hists) {
    const double width = (h.upper - h.lower) / static_cast<double>(h.mass.size());
    for (Eigen::Index b = 0; b < h.mass.size(); ++b)
      out << h.dimension << ',' << b << ',' << fmt(h.lower + b * width) << ',' << fmt(h.lower + (b + 1) * width) << ','
          << fmt(h.mass(b)) << '\n';
  }
}

std::string marginalSvg(const MarginalHistogram& hist) {
  PlotFrame frame;
  frame.width = 360;
  frame.height = 220;
  frame.xMin = hist.lower;
  frame.xMax = hist.upper;
  frame.yMin = 0.0;
  frame.yMax = std::max(hist.mass.maxCoeff() * 1.1, 1e-12);
  SvgDocument doc(frame.left + frame.width + 20, frame.top + frame.height + 50);
  frame.drawAxes(doc, "x" + std::to_string(hist.dimension), "probability mass", 4);
  const double width = (hist.upper - hist.lower) / static_cast<double>(hist.mass.size());
  for (Eigen::Index b = 0; b < hist.mass.size(); ++b) {
    const double x0 = frame.px(hist.lower + b * width);
    const double x1 = frame.px(hist.lower + (b + 1) * width);
    const double y = frame.py(hist.mass(b));
    doc.rect(x0, y, x1 - x0, frame.py(0.0) - y, "#4c72b0", "white");
  }
  return doc.str();
}

}  // namespace latentflow
