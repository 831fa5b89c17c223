#include "latentflow/mobo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "latentflow/errors.hpp"
#include "latentflow/pareto.hpp"
#include "latentflow/rng.hpp"
#include "latentflow/svg.hpp"

namespace latentflow {

namespace {

constexpr double kFlatAcquisition = 1e-12;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

Eigen::MatrixXd frontRows(const Eigen::MatrixXd& Y, const Eigen::VectorXd& r) {
  std::vector<Eigen::Index> inside;
  for (Eigen::Index i = 0; i < Y.rows(); ++i)
    if (strictlyInside(Y.row(i), r)) inside.push_back(i);
  Eigen::MatrixXd kept(static_cast<Eigen::Index>(inside.size()), Y.cols());
  for (std::size_t i = 0; i < inside.size(); ++i) kept.row(static_cast<Eigen::Index>(i)) = Y.row(inside[i]);
  return kept;
}

}  // namespace

SobolBallSampler::SobolBallSampler(int dimension, double radius, std::uint64_t seed)
    : sobol_(dimension, seed), radius_(radius) {
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
}

std::optional<Eigen::VectorXd> SobolBallSampler::tryNext() {
  ++candidates_;
  const Eigen::VectorXd x = (radius_ * (2.0 * sobol_.next().array() - 1.0)).matrix();
  if (x.norm() > radius_) return std::nullopt;
  ++accepted_;
  return x;
}

Eigen::VectorXd SobolBallSampler::next(long maxCandidates) {
  for (long i = 0; i < maxCandidates; ++i)
    if (auto x = tryNext()) return *x;
  throw NumericFailure("Sobol ball sampling stalled: no acceptance in " + std::to_string(maxCandidates) + " candidates");
}

Eigen::MatrixXd sobolBallDoe(int d, int n, double radius, std::uint64_t seed) {
  if (n < 1) throw DomainError("design size must be at least 1");
  if (d < 1) throw DomainError("dimension must be at least 1");
  SobolBallSampler sampler(d, radius, seed);
  Eigen::MatrixXd X(n, d);
  for (int i = 0; i < n; ++i) X.row(i) = sampler.next().transpose();
  return X;
}

Eigen::VectorXd projectToBall(const Eigen::VectorXd& x, double radius) {
  const double norm = x.norm();
  if (norm <= radius) return x;
  Eigen::VectorXd y = x * (radius / norm);
  // Guard against rounding leaving the point a hair outside.
  while (y.norm() > radius) y *= (1.0 - 1e-15);
  return y;
}

Eigen::VectorXd referencePoint(const Eigen::MatrixXd& Y) {
  if (Y.rows() == 0) throw DomainError("reference point needs at least one observation");
  const Eigen::VectorXd hi = Y.colwise().maxCoeff();
  const Eigen::VectorXd lo = Y.colwise().minCoeff();
  Eigen::VectorXd r(Y.cols());
  for (Eigen::Index k = 0; k < Y.cols(); ++k) {
    double span = hi(k) - lo(k);
    if (!(span > 0.0)) span = std::max(std::abs(hi(k)), 1.0);
    r(k) = hi(k) + 0.1 * span;
  }
  return r;
}

EhviAcquisition::EhviAcquisition(const std::vector<GpModel>& models, const Eigen::MatrixXd& archive,
                                 const Eigen::VectorXd& reference, int samples, std::uint64_t seed)
    : models_(&models), archive_(frontRows(archive, reference)), reference_(reference) {
  if (samples < 1) throw DomainError("EHVI needs at least one sample");
  if (!models.empty() && static_cast<Eigen::Index>(models.size()) != reference.size())
    throw DimensionMismatch("one model per objective expected");
  if (archive.rows() > 0 && archive.cols() != reference.size())
    throw DimensionMismatch("archive objective count differs from reference point");
  Rng rng({seed, 0xe4b1ULL});
  normals_ = rng.normalMatrix(samples, reference.size());
}

double EhviAcquisition::fromMoments(const Eigen::VectorXd& mean, const Eigen::VectorXd& sd) const {
  const Eigen::Index q = reference_.size();
  double total = 0.0;
  if (q == 2) {
    const SortedFront2<double> front(archive_, reference_);
    for (Eigen::Index s = 0; s < normals_.rows(); ++s)
      total += front.improvement(mean(0) + sd(0) * normals_(s, 0), mean(1) + sd(1) * normals_(s, 1));
  } else {
    const double base = hypervolume(archive_, reference_);
    Eigen::MatrixXd joined(archive_.rows() + 1, q);
    joined.topRows(archive_.rows()) = archive_;
    for (Eigen::Index s = 0; s < normals_.rows(); ++s) {
      const Eigen::VectorXd y = mean.array() + sd.array() * normals_.row(s).transpose().array();
      if (!strictlyInside(y, reference_)) continue;
      joined.row(archive_.rows()) = y.transpose();
      total += std::max(0.0, hypervolume(joined, reference_) - base);
    }
  }
  return total / static_cast<double>(normals_.rows());
}

double EhviAcquisition::operator()(const Eigen::VectorXd& x0) const {
  const Eigen::Index q = reference_.size();
  Eigen::VectorXd mean(q), sd(q);
  const Eigen::MatrixXd row = x0.transpose();
  for (Eigen::Index k = 0; k < q; ++k) {
    const Prediction p = (*models_)[static_cast<std::size_t>(k)].predict(row);
    mean(k) = p.mean(0);
    sd(k) = std::sqrt(p.variance(0));
  }
  return fromMoments(mean, sd);
}

double ehvi(const std::vector<GpModel>& models, const Eigen::VectorXd& x0, const Eigen::MatrixXd& archive,
            const Eigen::VectorXd& reference, int samples, std::uint64_t seed) {
  return EhviAcquisition(models, archive, reference, samples, seed)(x0);
}

Proposal proposeBatch(std::vector<GpModel> models, const Eigen::MatrixXd& archive, const Eigen::VectorXd& reference,
                      const ProposeOptions& options) {
  if (options.batchSize < 1) throw DomainError("batch size must be at least 1");
  if (options.restarts < 1) throw DomainError("need at least one acquisition restart");
  if (models.empty()) throw DomainError("need at least one model");
  const int d = models.front().dimension();
  Proposal proposal;
  proposal.points.resize(options.batchSize, d);
  Eigen::MatrixXd believed = archive;

  for (int pick = 0; pick < options.batchSize; ++pick) {
    const EhviAcquisition acq(models, believed, reference, options.mcSamples, hashKeys({options.seed, 0xac9ULL}));
    SobolBallSampler starts(d, options.radius, hashKeys({options.seed, 0x57a7ULL, static_cast<std::uint64_t>(pick)}));
    Eigen::VectorXd bestX;
    double bestValue = -1.0;
    std::vector<Eigen::VectorXd> startPoints;
    for (int s = 0; s < options.restarts; ++s) {
      Eigen::VectorXd x = starts.next();
      startPoints.push_back(x);
      double fx = acq(x);
      double step = 0.25 * options.radius;
      int evaluations = 1;
      while (step > 1e-3 && evaluations < options.maxEvaluationsPerStart) {
        bool moved = false;
        for (int j = 0; j < d && evaluations < options.maxEvaluationsPerStart; ++j) {
          for (double sign : {1.0, -1.0}) {
            Eigen::VectorXd trial = x;
            trial(j) += sign * step;
            trial = projectToBall(trial, options.radius);
            const double ft = acq(trial);
            ++evaluations;
            if (ft > fx) {
              x = trial;
              fx = ft;
              moved = true;
              break;
            }
          }
        }
        if (!moved) step *= 0.5;
      }
      if (fx > bestValue) {
        bestValue = fx;
        bestX = x;
      }
    }
    if (bestValue < kFlatAcquisition) {
      // Flat acquisition: fall back to the start farthest from everything observed or picked.
      proposal.converged = false;
      double bestSpread = -1.0;
      for (const auto& x : startPoints) {
        double spread = std::numeric_limits<double>::infinity();
        const Eigen::MatrixXd& seen = models.front().inputs();
        for (Eigen::Index i = 0; i < seen.rows(); ++i) spread = std::min(spread, (seen.row(i).transpose() - x).norm());
        if (spread > bestSpread) {
          bestSpread = spread;
          bestX = x;
        }
      }
    }
    proposal.points.row(pick) = bestX.transpose();
    proposal.acquisition.push_back(std::max(bestValue, 0.0));

    // Kriging believer: the posterior mean becomes a pseudo-observation.
    Eigen::VectorXd believedY(static_cast<Eigen::Index>(models.size()));
    for (std::size_t k = 0; k < models.size(); ++k) {
      believedY(static_cast<Eigen::Index>(k)) = models[k].predict(bestX.transpose()).mean(0);
      models[k] = models[k].withObservation(bestX, believedY(static_cast<Eigen::Index>(k)));
    }
    believed.conservativeResize(believed.rows() + 1, reference.size());
    believed.row(believed.rows() - 1) = believedY.transpose();
  }
  return proposal;
}

Eigen::MatrixXd OptimizationHistory::insideObjectives(std::vector<int>* ids) const {
  std::vector<const EvaluationRecord*> kept;
  for (const auto& e : evaluations)
    if (e.y && reference.size() == e.y->size() && strictlyInside(*e.y, reference)) kept.push_back(&e);
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(kept.size()), reference.size());
  if (ids) ids->clear();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    Y.row(static_cast<Eigen::Index>(i)) = kept[i]->y->transpose();
    if (ids) ids->push_back(kept[i]->id);
  }
  return Y;
}

namespace {

void recordBatch(OptimizationHistory& h, BatchRecord rec) {
  std::vector<int> ids;
  const Eigen::MatrixXd Y = h.insideObjectives(&ids);
  rec.hypervolume = hypervolume(Y, h.reference);
  for (Eigen::Index i : paretoFilter(Y)) rec.archiveIds.push_back(ids[static_cast<std::size_t>(i)]);
  h.batches.push_back(std::move(rec));
}

int evaluateInto(OptimizationHistory& h, const Evaluator& evaluator, const Eigen::MatrixXd& X, int batch,
                 std::vector<int>& ids) {
  const auto ys = evaluator(X);
  if (static_cast<Eigen::Index>(ys.size()) != X.rows()) throw DimensionMismatch("evaluator returned wrong count");
  int ok = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    EvaluationRecord rec;
    rec.id = static_cast<int>(h.evaluations.size());
    rec.batch = batch;
    rec.x = X.row(i).transpose();
    rec.y = ys[static_cast<std::size_t>(i)];
    if (rec.y && !rec.y->allFinite()) rec.y.reset();
    if (rec.y) ++ok;
    ids.push_back(rec.id);
    h.evaluations.push_back(std::move(rec));
  }
  return ok;
}

}  // namespace

OptimizationHistory runLoop(const Evaluator& evaluator, const LoopConfig& cfg, const LoopLog& log) {
  if (cfg.latentDim < 1 || cfg.initial < 1 || cfg.batches < 0 || cfg.batchSize < 1)
    throw DomainError("invalid optimization loop configuration");
  OptimizationHistory h;
  const Eigen::MatrixXd doe = sobolBallDoe(cfg.latentDim, cfg.initial, cfg.radius, cfg.seed);
  BatchRecord first;
  if (evaluateInto(h, evaluator, doe, 0, first.ids) < 2) {
    h.aborted = true;
    h.message = "fewer than two initial-design evaluations succeeded";
    return h;
  }
  {
    std::vector<Eigen::VectorXd> ok;
    for (const auto& e : h.evaluations)
      if (e.y) ok.push_back(*e.y);
    Eigen::MatrixXd Y(static_cast<Eigen::Index>(ok.size()), ok.front().size());
    for (std::size_t i = 0; i < ok.size(); ++i) Y.row(static_cast<Eigen::Index>(i)) = ok[i].transpose();
    h.reference = referencePoint(Y);
  }
  recordBatch(h, std::move(first));
  if (log) log(h.batches.back());

  for (int b = 1; b <= cfg.batches; ++b) {
    std::vector<const EvaluationRecord*> ok;
    for (const auto& e : h.evaluations)
      if (e.y) ok.push_back(&e);
    const Eigen::Index n = static_cast<Eigen::Index>(ok.size());
    const Eigen::Index q = h.reference.size();
    Eigen::MatrixXd X(n, cfg.latentDim);
    Eigen::MatrixXd Y(n, q);
    for (Eigen::Index i = 0; i < n; ++i) {
      X.row(i) = ok[static_cast<std::size_t>(i)]->x.transpose();
      Y.row(i) = ok[static_cast<std::size_t>(i)]->y->transpose();
    }
    std::vector<GpModel> models;
    for (Eigen::Index k = 0; k < q; ++k)
      models.push_back(fitGp(X, Y.col(k),
                             {cfg.gpRestarts, hashKeys({cfg.seed, 0x6b0ULL, static_cast<std::uint64_t>(b),
                                                        static_cast<std::uint64_t>(k)}),
                              400}));
    ProposeOptions po;
    po.batchSize = cfg.batchSize;
    po.restarts = cfg.restarts;
    po.mcSamples = cfg.mcSamples;
    po.radius = cfg.radius;
    po.seed = hashKeys({cfg.seed, 0x9b7ULL, static_cast<std::uint64_t>(b)});
    const Proposal proposal = proposeBatch(models, Y, h.reference, po);

    BatchRecord rec;
    rec.batch = b;
    rec.acquisition = proposal.acquisition;
    rec.converged = proposal.converged;
    if (evaluateInto(h, evaluator, proposal.points, b, rec.ids) == 0) {
      recordBatch(h, std::move(rec));
      h.aborted = true;
      h.message = "every evaluation in batch " + std::to_string(b) + " failed";
      return h;
    }
    recordBatch(h, std::move(rec));
    if (log) log(h.batches.back());
  }
  return h;
}

double sobolBaselineHypervolume(const Evaluator& evaluator, const LoopConfig& cfg, const Eigen::VectorXd& reference) {
  const int budget = cfg.initial + cfg.batches * cfg.batchSize;
  const Eigen::MatrixXd X = sobolBallDoe(cfg.latentDim, budget, cfg.radius, cfg.seed);
  const auto ys = evaluator(X);
  std::vector<Eigen::VectorXd> inside;
  for (const auto& y : ys)
    if (y && y->allFinite() && strictlyInside(*y, reference)) inside.push_back(*y);
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(inside.size()), reference.size());
  for (std::size_t i = 0; i < inside.size(); ++i) Y.row(static_cast<Eigen::Index>(i)) = inside[i].transpose();
  return hypervolume(Y, reference);
}

void writeHistoryCsv(std::ostream& out, const OptimizationHistory& history) {
  const Eigen::Index d = history.evaluations.empty() ? 0 : history.evaluations.front().x.size();
  const Eigen::Index q = history.reference.size();
  out << "batch,eval_id";
  for (Eigen::Index j = 0; j < d; ++j) out << ",x" << j;
  for (Eigen::Index k = 0; k < q; ++k) out << ",f" << (k + 1);
  out << ",hypervolume\n";
  for (const auto& e : history.evaluations) {
    out << e.batch << ',' << e.id;
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << fmt(e.x(j));
    for (Eigen::Index k = 0; k < q; ++k) out << ',' << (e.y ? fmt((*e.y)(k)) : std::string("nan"));
    double hv = 0.0;
    for (const auto& b : history.batches)
      if (b.batch == e.batch) hv = b.hypervolume;
    out << ',' << fmt(hv) << '\n';
  }
}

void writeParetoCsv(std::ostream& out, const OptimizationHistory& history) {
  const Eigen::Index d = history.evaluations.empty() ? 0 : history.evaluations.front().x.size();
  const Eigen::Index q = history.reference.size();
  out << "eval_id";
  for (Eigen::Index j = 0; j < d; ++j) out << ",x" << j;
  for (Eigen::Index k = 0; k < q; ++k) out << ",f" << (k + 1);
  out << '\n';
  if (history.batches.empty()) return;
  for (int id : history.batches.back().archiveIds) {
    const auto& e = history.evaluations[static_cast<std::size_t>(id)];
    out << e.id;
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << fmt(e.x(j));
    for (Eigen::Index k = 0; k < q; ++k) out << ',' << fmt((*e.y)(k));
    out << '\n';
  }
}

void writeAcquisitionCsv(std::ostream& out, const OptimizationHistory& history) {
  out << "batch,pick,eval_id,ehvi,converged\n";
  for (const auto& b : history.batches) {
    for (std::size_t i = 0; i < b.acquisition.size(); ++i)
      out << b.batch << ',' << i << ',' << b.ids[i] << ',' << fmt(b.acquisition[i]) << ',' << (b.converged ? 1 : 0)
          << '\n';
  }
}

std::string frontierSvg(const OptimizationHistory& history, const std::string& xLabel, const std::string& yLabel) {
  std::vector<const EvaluationRecord*> ok;
  for (const auto& e : history.evaluations)
    if (e.y && e.y->size() >= 2) ok.push_back(&e);
  Eigen::VectorXd xs(static_cast<Eigen::Index>(ok.size()));
  Eigen::VectorXd ys(static_cast<Eigen::Index>(ok.size()));
  for (std::size_t i = 0; i < ok.size(); ++i) {
    xs(static_cast<Eigen::Index>(i)) = (*ok[i]->y)(0);
    ys(static_cast<Eigen::Index>(i)) = (*ok[i]->y)(1);
  }
  PlotFrame frame;
  frame.width = 460;
  frame.height = 360;
  frame.fit(xs, ys);
  SvgDocument doc(frame.left + frame.width + 150, frame.top + frame.height + 50);
  frame.drawAxes(doc, xLabel, yLabel);

  // Pareto staircase of the final archive.
  if (!history.batches.empty() && history.reference.size() >= 2) {
    std::vector<std::pair<double, double>> front;
    for (int id : history.batches.back().archiveIds) {
      const auto& y = *history.evaluations[static_cast<std::size_t>(id)].y;
      front.emplace_back(y(0), y(1));
    }
    std::sort(front.begin(), front.end());
    std::vector<Eigen::Vector2d> stairs;
    const double rx = std::min(history.reference(0), frame.xMax);
    const double ry = std::min(history.reference(1), frame.yMax);
    if (!front.empty()) stairs.emplace_back(frame.px(front.front().first), frame.py(ry));
    for (std::size_t i = 0; i < front.size(); ++i) {
      stairs.emplace_back(frame.px(front[i].first), frame.py(front[i].second));
      const double nextX = i + 1 < front.size() ? front[i + 1].first : rx;
      stairs.emplace_back(frame.px(nextX), frame.py(front[i].second));
    }
    if (!stairs.empty()) doc.polyline(stairs, "#333333", 1.5);
  }
  int maxBatch = 0;
  for (const auto* e : ok) maxBatch = std::max(maxBatch, e->batch);
  for (std::size_t i = 0; i < ok.size(); ++i)
    doc.circle(frame.px(xs(static_cast<Eigen::Index>(i))), frame.py(ys(static_cast<Eigen::Index>(i))), 3.5,
               categoricalColor(ok[i]->batch));
  double ly = frame.top + 10;
  const double lx = frame.left + frame.width + 20;
  for (int b = 0; b <= maxBatch; ++b) {
    doc.circle(lx, ly - 4, 5.0, categoricalColor(b));
    doc.text(lx + 12, ly, b == 0 ? std::string("initial design") : "batch " + std::to_string(b), 12);
    ly += 20;
  }
  return doc.str();
}

}  // namespace latentflow
