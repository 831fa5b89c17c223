#include "latentflow/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "latentflow/errors.hpp"
#include "latentflow/rng.hpp"
#include "latentflow/svg.hpp"

namespace latentflow {

namespace {

constexpr double kEntropyTolerance = 1e-5;
constexpr double kProbabilityFloor = 1e-12;

Eigen::MatrixXd squaredDistances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  }
  return d;
}

std::uint64_t contentKey(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  std::uint64_t h = 0x7513ULL;
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    std::uint64_t bits;
    const double v = row(j) == 0.0 ? 0.0 : row(j);  // fold -0 into +0
    std::memcpy(&bits, &v, sizeof bits);
    h = hashKeys({h, bits});
  }
  return h;
}

}  // namespace

double rowEntropy(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < row.size(); ++j)
    if (row(j) > 0.0) h -= row(j) * std::log(row(j));
  return h;
}

Eigen::MatrixXd conditionalAffinities(const Eigen::MatrixXd& points, double perplexity) {
  const Eigen::Index n = points.rows();
  if (!(perplexity >= 2.0)) throw DomainError("perplexity must be at least 2");
  if (static_cast<double>(n) < 3.0 * perplexity) throw DomainError("t-SNE needs at least 3 * perplexity points");
  const Eigen::MatrixXd d = squaredDistances(points);
  if (!(d.maxCoeff() > 0.0)) throw DomainError("all input points are identical");
  const double target = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::RowVectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double dMin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) dMin = std::min(dMin, d(i, j));
    // Entropy is decreasing in beta; bisect on log(beta).
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    double beta = 1.0;
    {
      // Scale the starting bandwidth to the row's distance spread.
      double mean = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != i) mean += d(i, j) - dMin;
      mean /= static_cast<double>(n - 1);
      if (mean > 0.0) beta = 1.0 / mean;
    }
    double logBeta = std::log(beta);
    for (int it = 0; it < 400; ++it) {
      beta = std::exp(logBeta);
      double sum = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-beta * (d(i, j) - dMin));
        sum += row(j);
      }
      row /= sum;
      const double h = rowEntropy(row);
      if (std::abs(h - target) < kEntropyTolerance) break;
      if (h > target) lo = logBeta;
      else hi = logBeta;
      if (std::isinf(hi)) logBeta += 1.0;
      else if (std::isinf(lo)) logBeta -= 1.0;
      else logBeta = 0.5 * (lo + hi);
    }
    p.row(i) = row;
  }
  return p;
}

Embedding2D tsneEmbed(const Eigen::MatrixXd& latents, const std::vector<int>& labels, const TsneConfig& cfg) {
  const Eigen::Index n = latents.rows();
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(n))
    throw DimensionMismatch("label count differs from point count");
  if (!latents.allFinite()) throw DomainError("non-finite latent coordinates");
  if (cfg.iterations < 0 || cfg.exaggerationIterations < 0) throw DomainError("iteration counts must be non-negative");

  // Canonical (lexicographic) order makes every floating-point reduction independent
  // of the caller's ordering.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < latents.cols(); ++j) {
      if (latents(a, j) < latents(b, j)) return true;
      if (latents(a, j) > latents(b, j)) return false;
    }
    return false;
  });
  Eigen::MatrixXd x(n, latents.cols());
  for (Eigen::Index i = 0; i < n; ++i) x.row(i) = latents.row(order[static_cast<std::size_t>(i)]);

  const Eigen::MatrixXd cond = conditionalAffinities(x, cfg.perplexity);
  Eigen::MatrixXd p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(kProbabilityFloor);
  p.diagonal().setZero();
  p /= p.sum();

  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng({cfg.seed, contentKey(x.row(i))});
    y(i, 0) = 1e-4 * rng.normal();
    y(i, 1) = 1e-4 * rng.normal();
  }

  const double lr = cfg.learningRate > 0.0 ? cfg.learningRate : std::max(static_cast<double>(n) / 12.0, 1.0);
  Eigen::MatrixXd update = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd num(n, n);
  Eigen::MatrixXd grad(n, 2);

  Embedding2D emb;
  emb.klHistory.reserve(static_cast<std::size_t>(cfg.iterations));
  for (int it = 0; it < cfg.iterations; ++it) {
    const bool early = it < cfg.exaggerationIterations;
    const double exaggeration = early ? cfg.exaggeration : 1.0;
    const double momentum = early ? 0.5 : 0.8;

    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j)
        num(i, j) = num(j, i) = 1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
    }
    const double z = num.sum();
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::RowVector2d g = Eigen::RowVector2d::Zero();
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
        g += w * (y.row(i) - y.row(j));
      }
      grad.row(i) = 4.0 * g;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) {
        const bool sameSign = (grad(i, c) > 0.0) == (update(i, c) > 0.0);
        gains(i, c) = sameSign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
        update(i, c) = momentum * update(i, c) - lr * gains(i, c) * grad(i, c);
      }
    }
    y += update;
    y.rowwise() -= y.colwise().mean();

    // KL of the updated layout against the unexaggerated affinities.
    double zNew = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) zNew += 2.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm());
    double kl = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i || p(i, j) <= 0.0) continue;
        const double q = std::max(1.0 / (1.0 + (y.row(i) - y.row(j)).squaredNorm()) / zNew, 1e-300);
        kl += p(i, j) * std::log(p(i, j) / q);
      }
    if (!std::isfinite(kl)) throw NumericFailure("t-SNE divergence became non-finite");
    emb.klHistory.push_back(std::max(kl, 0.0));
  }

  emb.points.resize(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) emb.points.row(order[static_cast<std::size_t>(i)]) = y.row(i);
  emb.labels = labels.empty() ? std::vector<int>(static_cast<std::size_t>(n), 0) : labels;
  return emb;
}

std::string scatterSvg(const Embedding2D& emb, const std::vector<std::string>& labelNames) {
  if (emb.points.rows() == 0) throw DomainError("empty embedding");
  PlotFrame frame;
  frame.width = 420;
  frame.height = 420;
  frame.fit(emb.points.col(0), emb.points.col(1));
  SvgDocument doc(frame.left + frame.width + 170, frame.top + frame.height + 50);
  frame.drawAxes(doc, "t-SNE 1", "t-SNE 2");
  for (Eigen::Index i = 0; i < emb.points.rows(); ++i)
    doc.circle(frame.px(emb.points(i, 0)), frame.py(emb.points(i, 1)), 3.0,
               categoricalColor(emb.labels[static_cast<std::size_t>(i)]));
  const std::set<int> present(emb.labels.begin(), emb.labels.end());
  double ly = frame.top + 10;
  const double lx = frame.left + frame.width + 20;
  for (int label : present) {
    const std::string name = label >= 0 && static_cast<std::size_t>(label) < labelNames.size()
                                 ? labelNames[static_cast<std::size_t>(label)]
                                 : "label " + std::to_string(label);
    doc.circle(lx, ly - 4, 5.0, categoricalColor(label));
    doc.text(lx + 12, ly, name, 12);
    ly += 20;
  }
  return doc.str();
}

void emitScatterSvg(const Embedding2D& emb, const std::vector<std::string>& labelNames,
                    const std::filesystem::path& path) {
  const std::string svg = scatterSvg(emb, labelNames);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg;
  if (!out) throw IoError("failed writing " + path.string());
}

void writeEmbeddingCsv(std::ostream& out, const Embedding2D& emb, const std::vector<std::string>& labelNames) {
  out << "x,y,label\n";
  char buf[64];
  for (Eigen::Index i = 0; i < emb.points.rows(); ++i) {
    const int label = emb.labels[static_cast<std::size_t>(i)];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,", emb.points(i, 0), emb.points(i, 1));
    out << buf
        << (label >= 0 && static_cast<std::size_t>(label) < labelNames.size() ? labelNames[static_cast<std::size_t>(label)]
                                                                              : std::to_string(label))
        << '\n';
  }
}

}  // namespace latentflow
