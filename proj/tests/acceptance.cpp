// Acceptance checks: one PASS/FAIL line per criterion, each with its runtime budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "latentflow/config.hpp"
#include "latentflow/corpus.hpp"
#include "latentflow/errors.hpp"
#include "latentflow/gp.hpp"
#include "latentflow/infogan.hpp"
#include "latentflow/interpret.hpp"
#include "latentflow/mobo.hpp"
#include "latentflow/nn.hpp"
#include "latentflow/pareto.hpp"
#include "latentflow/rng.hpp"
#include "latentflow/surrogate.hpp"
#include "latentflow/tsne.hpp"
#include "oracles.hpp"

namespace lf = latentflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed sub-checks and a short summary of the measured quantities.
class Checker {
public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      failures_ += (failures_.empty() ? "" : "; ") + what;
    }
  }
  void note(const char* fmt, double a, double b = 0, double c = 0) {
    char buf[200];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    notes_ += (notes_.empty() ? "" : ", ") + std::string(buf);
  }
  Outcome outcome() const { return {pass_, failures_.empty() ? notes_ : failures_ + " | " + notes_}; }

private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

int failures = 0;

void run(const std::string& name, double budgetSeconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budgetSeconds) {
    o.pass = false;
    o.detail += " | runtime over budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-40s %7.1fs / %4.0fs  %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), secs, budgetSeconds,
              o.detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------

Outcome hypervolumeOracle() {
  Checker c;
  Eigen::MatrixXd P(2, 2);
  P << 1, 2, 2, 1;
  c.require(lf::hypervolume(P, Eigen::Vector2d(3, 3)) == 3.0, "{(1,2),(2,1)} at r=(3,3) is not exactly 3");

  lf::Rng rng(20240501);
  const long samples = 1'000'000;
  int within = 0;
  double worstZ = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int m = 1 + static_cast<int>(rng.below(20));
    Eigen::MatrixXd Y(m, 2);
    for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) = rng.uniform(0.0, 1.0);
    const Eigen::Vector2d r(1.1, 1.1);
    const double exact = lf::hypervolume(Y, r);
    const Eigen::Vector2d lo = Y.colwise().minCoeff().transpose();
    const double box = (r - lo).prod();
    long hits = 0;
    for (long s = 0; s < samples; ++s) {
      const double a = rng.uniform(lo(0), r(0)), b = rng.uniform(lo(1), r(1));
      for (Eigen::Index i = 0; i < m; ++i)
        if (Y(i, 0) <= a && Y(i, 1) <= b) {
          ++hits;
          break;
        }
    }
    const double p = static_cast<double>(hits) / samples;
    const double se = box * std::sqrt(std::max(p * (1 - p), 1e-300) / samples);
    const double z = std::abs(box * p - exact) / se;
    worstZ = std::max(worstZ, z);
    within += z <= 3.0;
  }
  c.require(within == 50, "an archive disagreed with Monte Carlo by more than 3 standard errors");
  c.note("%.0f/50 archives within 3 SE, worst |z| %.2f", within, worstZ);
  return c.outcome();
}

std::vector<lf::GpModel> placeholderModels() {
  Eigen::MatrixXd X(3, 1);
  X << -1, 0, 1;
  const Eigen::Vector3d y(0.0, 1.0, 0.5);
  lf::GpHyper h;
  h.omega = Eigen::VectorXd::Zero(1);
  return {lf::GpModel(X, y, h), lf::GpModel(X, y, h)};
}

Outcome ehviQuadrature() {
  Checker c;
  Eigen::MatrixXd archive(1, 2);
  archive << 1.0, 1.0;
  const Eigen::Vector2d r(3.0, 3.0);
  const Eigen::Vector2d mu(1.4, 0.7), sd(0.6, 0.4);
  const auto models = placeholderModels();
  const lf::EhviAcquisition acq(models, archive, r, 10000, 7);
  const double mc = acq.fromMoments(mu, sd);
  const double quad = oracle::gaussianExpectation2d(
      [&](double a, double b) { return lf::hvi(archive, Eigen::Vector2d(a, b), r); }, mu(0), sd(0), mu(1), sd(1), 96, 20);
  const double rel = std::abs(mc - quad) / quad;
  c.require(rel < 0.02, "MC and quadrature differ by 2% or more");
  c.note("MC %.5f vs quadrature %.5f (rel %.2e)", mc, quad, rel);
  return c.outcome();
}

Outcome gpCorrectness() {
  Checker c;
  lf::Rng rng(5);
  double worstGrad = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd X = rng.normalMatrix(5, 3);
    const Eigen::VectorXd Y = rng.normalVector(5);
    lf::GpHyper h;
    h.omega = Eigen::VectorXd(3);
    for (int j = 0; j < 3; ++j) h.omega(j) = rng.uniform(-1, 1);
    h.logVariance = rng.uniform(-1, 1);
    h.mean = rng.uniform(-1, 1);
    const auto ev = lf::logMarginalLikelihood(h, X, Y);
    for (int k = 0; k < 5; ++k) {
      const double e = 1e-6;
      lf::GpHyper a = h, b = h;
      auto bump = [&](lf::GpHyper& g, double v) {
        if (k < 3) g.omega(k) += v;
        else if (k == 3) g.logVariance += v;
        else g.mean += v;
      };
      bump(a, e);
      bump(b, -e);
      const double fd = (lf::logMarginalLikelihood(a, X, Y).value - lf::logMarginalLikelihood(b, X, Y).value) / (2 * e);
      worstGrad = std::max(worstGrad, std::abs(fd - ev.gradient(k)) /
                                          std::max({1e-8, std::abs(fd), std::abs(ev.gradient(k))}));
    }
  }
  c.require(worstGrad < 1e-5, "evidence gradient relative error >= 1e-5");

  double worstInterp = 0.0, worstMean = 0.0, worstVar = 0.0;
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd X(6, 2);
    for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd Y(6);
    for (int i = 0; i < 6; ++i) Y(i) = 3 + 2 * std::sin(3 * X(i, 0)) + X(i, 1);
    const auto gp = lf::fitGp(X, Y, {8, static_cast<std::uint64_t>(t + 1)});
    worstInterp = std::max(worstInterp, (gp.predict(X).mean - Y).cwiseAbs().maxCoeff());
    const auto far = gp.predict(Eigen::MatrixXd::Constant(1, 2, 1e3));
    worstMean = std::max(worstMean, std::abs(far.mean(0) - gp.priorMean()));
    worstVar = std::max(worstVar, std::abs(far.variance(0) - (gp.priorVariance() + gp.jitterVariance())));
  }
  c.require(worstInterp < 1e-6, "interpolation error >= 1e-6");
  c.require(worstMean < 1e-6 && worstVar < 1e-6, "prior reversion error >= 1e-6");
  c.note("gradient rel %.1e, interpolation %.1e, reversion %.1e", worstGrad, worstInterp, std::max(worstMean, worstVar));
  return c.outcome();
}

Outcome neuralGradient() {
  namespace nn = lf::nn;
  Checker c;
  lf::Rng rng(77);
  const nn::Activation acts[] = {nn::Activation::LeakyRelu, nn::Activation::Tanh, nn::Activation::Sigmoid,
                                 nn::Activation::Linear};
  double worst = 0.0;
  int withBatchNorm = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int layers = 1 + trial % 3;
    std::vector<nn::LayerSpec> specs;
    int width = 2 + static_cast<int>(rng.below(5));
    const int in = width;
    for (int l = 0; l < layers; ++l) {
      const int out = 2 + static_cast<int>(rng.below(5));
      const bool bn = l + 1 < layers && (trial % 2 == 0 || rng.below(2) == 0);
      withBatchNorm += bn;
      specs.push_back({width, out, acts[rng.below(4)], 0.2, bn});
      width = out;
    }
    nn::DenseNetwork net(specs, 1000 + trial);
    const Eigen::MatrixXd x = rng.normalMatrix(8, in);
    const Eigen::MatrixXd w = rng.normalMatrix(8, width);
    auto loss = [&](nn::DenseNetwork& n, const Eigen::MatrixXd& input) {
      nn::ForwardCache cache;
      return (n.forward(input, cache).array() * w.array()).sum();
    };
    nn::ForwardCache cache;
    net.forward(x, cache);
    const auto g = net.backward(cache, w);
    const Eigen::VectorXd p0 = net.parameters();
    const double h = 1e-5;
    for (Eigen::Index k = 0; k < p0.size(); ++k) {
      Eigen::VectorXd p = p0;
      p(k) = p0(k) + h;
      net.setParameters(p);
      const double up = loss(net, x);
      p(k) = p0(k) - h;
      net.setParameters(p);
      const double down = loss(net, x);
      const double fd = (up - down) / (2 * h);
      worst = std::max(worst, std::abs(fd - g.parameters(k)) / std::max({1e-4, std::abs(fd), std::abs(g.parameters(k))}));
    }
    net.setParameters(p0);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Eigen::MatrixXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      const double fd = (loss(net, xp) - loss(net, xm)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g.input(i)) / std::max({1e-4, std::abs(fd), std::abs(g.input(i))}));
    }
  }
  c.require(worst < 1e-4, "backward disagrees with finite differences by 1e-4 or more");
  c.require(withBatchNorm > 0, "no batch-normalized layer exercised");
  c.note("max relative error %.2e over 20 networks (%.0f batch-norm layers)", worst, withBatchNorm);
  return c.outcome();
}

Outcome sobolBall() {
  Checker c;
  lf::SobolBallSampler sampler(8, 2.0, 1);
  long outside = 0;
  for (int i = 0; i < 100000; ++i)
    if (auto x = sampler.tryNext()) outside += !(x->norm() <= 2.0);
  const double frac = static_cast<double>(sampler.accepted()) / static_cast<double>(sampler.candidates());
  c.require(frac >= 0.013 && frac <= 0.019, "acceptance fraction outside [0.013, 0.019]");
  c.require(outside == 0, "an accepted point violates the norm bound");
  c.note("acceptance %.4f of %.0f candidates", frac, static_cast<double>(sampler.candidates()));
  return c.outcome();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome corpusStructure() {
  Checker c;
  const lf::PipelineConfig cfg = lf::PipelineConfig::parse(
      "[corpus]\ntable_seed = 1\nmix_seed = 2\n[gan]\nseed = 1\n[viz]\nseed = 1\n[mobo]\nseed = 1\n[interpret]\nseed = 1\n");
  const fs::path a = fs::temp_directory_path() / "lf_accept_corpus_a", b = fs::temp_directory_path() / "lf_accept_corpus_b";
  std::vector<lf::Corpus> runs;
  for (const auto& dir : {a, b}) {
    fs::remove_all(dir);
    const auto tables = lf::sampleAllDesignTables(cfg.corpus.rowsPerArchetype, cfg.corpus.tableSeed);
    runs.push_back(lf::buildCorpus(tables, cfg.corpus.plan, cfg.corpus.resolution));
    lf::writeCorpus(dir, runs.back());
  }
  const auto& corpus = runs.front();
  c.require(corpus.manifest.halfCount() == 125, "base half count is not 125");
  c.require(static_cast<int>(corpus.designs.size()) == cfg.corpus.plan.k, "mixed raster count differs from the plan");
  for (const char* f : {"manifest.txt", "rasters.lfrd", "provenance.csv"})
    c.require(slurp(a / f) == slurp(b / f), std::string(f) + " differs between reruns");
  int invalid = 0;
  for (const auto& z : corpus.designs) {
    auto rederived = z;
    lf::deriveBoundary(rederived);
    invalid += lf::checkRaster(z).has_value() || rederived.classes != z.classes || !lf::fluidSpansInletToOutlet(z);
  }
  c.require(invalid == 0, "a raster violates the class-partition or boundary invariants");
  c.note("%.0f halves, %.0f rasters at %.0f px", corpus.manifest.halfCount(), static_cast<double>(corpus.designs.size()),
         cfg.corpus.resolution);
  fs::remove_all(a);
  fs::remove_all(b);
  return c.outcome();
}

lf::InfoGanConfig smokeGanConfig() {
  lf::InfoGanConfig cfg;
  cfg.latentDim = 4;
  cfg.epochs = 500;
  cfg.seed = 1;
  return cfg;
}

std::vector<lf::RasterDesign> smokeCorpus() {
  const auto tables = lf::sampleAllDesignTables(25, 1);
  return lf::buildCorpus(tables, {lf::MixingPreset::RandomK, 256, 1}, 16).designs;
}

lf::InfoGanModel smokeModel;

Outcome ganSmoke() {
  Checker c;
  const auto corpus = smokeCorpus();
  c.require(corpus.size() == 256 && corpus.front().width == 16, "smoke corpus is not 256 rasters at 16x16");
  const auto first = lf::trainInfoGan(corpus, smokeGanConfig());
  const auto& h = first.history;
  c.require(!h.diverged, "training diverged: " + h.message);
  c.require(h.epochs.size() == 500, "history does not cover 500 epochs");
  if (h.epochs.size() < 500) return c.outcome();
  const double rmse10 = h.epochs[9].probeRmse, rmseEnd = h.epochs.back().probeRmse;
  const double drop = 1.0 - rmseEnd / rmse10;
  c.require(drop >= 0.30, "probe RMSE dropped by less than 30%");
  bool inside = true;
  for (const auto& e : h.epochs) inside = inside && e.minDiscriminatorOutput > 0.0 && e.maxDiscriminatorOutput < 1.0;
  c.require(inside, "a discriminator output left (0,1)");
  const auto second = lf::trainInfoGan(corpus, smokeGanConfig());
  std::ostringstream ha, hb;
  lf::writeHistoryCsv(ha, first.history);
  lf::writeHistoryCsv(hb, second.history);
  c.require(ha.str() == hb.str() && first.model.generator.parameters() == second.model.generator.parameters(),
            "a second run with the same seed differs");
  // Plateau: least-squares slope of probe RMSE over the last quarter of epochs.
  const std::size_t q0 = h.epochs.size() * 3 / 4;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double nq = static_cast<double>(h.epochs.size() - q0);
  for (std::size_t i = q0; i < h.epochs.size(); ++i) {
    const double x = static_cast<double>(i), y = h.epochs[i].probeRmse;
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  const double slope = (nq * sxy - sx * sy) / (nq * sxx - sx * sx);
  c.require(slope <= 0.0, "probe RMSE trends upward over the last quarter");
  c.note("probe RMSE %.1f at epoch 10 -> %.1f final (%.0f%% drop)", rmse10, rmseEnd, 100.0 * drop);
  c.note("last-quarter slope %.4f per epoch", slope);
  smokeModel = first.model;
  return c.outcome();
}

lf::RasterDesign flipVertical(const lf::RasterDesign& a) {
  auto b = a;
  for (int r = 0; r < a.height; ++r)
    for (int col = 0; col < a.width; ++col) b.set(r, col, a.at(a.height - 1 - r, col));
  return b;
}

Outcome surrogatePhysics() {
  Checker c;
  // straight channel: p linear in x
  auto open = lf::makeRaster(40, 12, lf::PixelClass::Fluid);
  auto f = lf::solveFlow(open);
  double lin = 0.0;
  for (int r = 0; r < 12; ++r)
    for (int col = 0; col < 40; ++col) lin = std::max(lin, std::abs(f.pressure(r, col) - (1.0 - col / 39.0)));
  c.require(lin < 1e-8, "straight-channel pressure is not linear to 1e-8");

  // two parallel paths of 10 and 5 fluid rows between wide manifolds
  const int W = 310, H = 30;
  auto two = lf::makeRaster(W, H);
  for (int r = 0; r < H; ++r)
    for (int col = 0; col < W; ++col)
      if (col < 5 || col >= W - 5 || (r >= 2 && r < 12) || (r >= 20 && r < 25)) two.set(r, col, lf::PixelClass::Fluid);
  lf::deriveBoundary(two);
  f = lf::solveFlow(two);
  double upper = 0, lower = 0;
  for (int r = 0; r < H; ++r) (r <= 15 ? upper : lower) += f.horizontalFlux(r, W / 2);
  const double split = upper / lower, resistorOracle = 11.0 / 6.0;
  c.require(std::abs(split - resistorOracle) < 0.01 * resistorOracle, "flux split misses the resistor oracle by 1%");

  // corpus designs: mirror symmetry and mass conservation
  const auto tables = lf::sampleAllDesignTables(25, 1);
  const auto corpus = lf::buildCorpus(tables, {lf::MixingPreset::RandomK, 40, 3}, 32);
  double mirror = 0.0, mass = 0.0;
  for (const auto& z : corpus.designs) {
    const auto o = lf::evaluateDesign(z);
    for (const auto& m : {flipVertical(z), lf::flipHorizontal(z)}) {
      const auto om = lf::evaluateDesign(m);
      mirror = std::max({mirror, std::abs(om.nonUniformity - o.nonUniformity) / o.nonUniformity,
                         std::abs(om.resistance - o.resistance) / o.resistance});
    }
    const auto field = lf::solveFlow(lf::keepSpanningFluid(z));
    mass = std::max(mass, std::abs(field.throughput - field.outletFlux) / field.throughput);
  }
  c.require(mirror < 1e-10, "mirrored designs change the objectives by 1e-10 or more");
  c.require(mass < 1e-8, "inflow and outflow differ by 1e-8 or more");
  c.note("linearity %.1e, split %.4f vs %.4f", lin, split, resistorOracle);
  c.note("mirror %.1e, mass %.1e", mirror, mass);
  return c.outcome();
}

Outcome endToEnd() {
  Checker c;
  if (!smokeModel.trained()) {
    c.require(false, "smoke model unavailable");
    return c.outcome();
  }
  lf::Evaluator evaluator = [](const Eigen::MatrixXd& X) {
    const auto g = smokeModel.generate(X);
    std::vector<std::optional<Eigen::VectorXd>> out;
    for (const auto& z : g.rasters) {
      try {
        const auto o = lf::evaluateDesign(z);
        out.emplace_back(Eigen::Vector2d(o.nonUniformity, o.resistance));
      } catch (const lf::Error&) {
        out.emplace_back(std::nullopt);
      }
    }
    return out;
  };
  int wins = 0, monotone = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    lf::LoopConfig cfg;
    cfg.latentDim = 4;
    cfg.initial = 20;
    cfg.batches = 3;
    cfg.batchSize = 5;
    cfg.seed = seed;
    const auto h = lf::runLoop(evaluator, cfg);
    if (h.aborted) continue;
    bool mono = h.batches.size() == 4;
    for (std::size_t b = 1; b < h.batches.size(); ++b) mono = mono && h.batches[b].hypervolume >= h.batches[b - 1].hypervolume;
    monotone += mono;
    wins += h.finalHypervolume() > lf::sobolBaselineHypervolume(evaluator, cfg, h.reference);
  }
  c.require(monotone == 10, "hypervolume decreased within a run");
  c.require(wins >= 8, "fewer than 8 of 10 seeds beat the Sobol baseline");
  c.note("%.0f/10 beat the 35-point Sobol baseline, %.0f/10 monotone", wins, monotone);
  return c.outcome();
}

Outcome interpretability() {
  Checker c;
  Eigen::MatrixXd means(6, 2);
  means << 1, 4, 2, 2, 4, 1, 3, 3, 2, 5, 0.5, 6;
  const auto front = lf::paretoFilter(means);
  bool exact = true;
  for (int N : {1, 2, 10, 257, 1000}) {
    const auto pp = lf::paretoProbabilityGaussian(means, Eigen::MatrixXd::Zero(6, 2), N, 9);
    for (Eigen::Index i = 0; i < 6; ++i) {
      const bool member = std::find(front.begin(), front.end(), i) != front.end();
      exact = exact && pp.probs(i) == (member ? 1.0 : 0.0);
    }
  }
  c.require(exact, "zero-variance probabilities differ from Pareto membership");

  const std::vector<std::array<double, 4>> toy = {{0.0, 1.0, 1.0, 0.5}, {0.5, 0.7, 0.2, 1.2}, {1.0, 0.6, -0.3, 0.8}};
  Eigen::MatrixXd m(3, 2), s(3, 2);
  for (int i = 0; i < 3; ++i) {
    m.row(i) << toy[i][0], toy[i][2];
    s.row(i) << toy[i][1], toy[i][3];
  }
  const auto pp = lf::paretoProbabilityGaussian(m, s, 100000, 11);
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    worst = std::max(worst, std::abs(pp.probs(static_cast<Eigen::Index>(i)) - oracle::paretoProbability(toy, i)));
  c.require(worst < 0.02, "3-candidate toy misses quadrature by 0.02 or more");

  lf::ParetoProbability cand;
  cand.candidates = lf::sobolBallDoe(8, 4096, 2.0, 1);
  lf::Rng rng(3);
  cand.probs = Eigen::VectorXd(4096);
  for (Eigen::Index i = 0; i < 4096; ++i) cand.probs(i) = rng.uniform();
  double norm = 0.0;
  for (const auto& h : lf::marginalHistograms(cand, 20)) norm = std::max(norm, std::abs(h.mass.sum() - 1.0));
  c.require(norm <= 1e-12, "a marginal histogram does not sum to 1 within 1e-12");
  c.note("toy max error %.4f, histogram normalization %.1e", worst, norm);
  return c.outcome();
}

Outcome tsneSanity() {
  Checker c;
  int separated = 0;
  double worstEntropy = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    lf::Rng rng({seed, 99});
    const int n = 300;
    Eigen::MatrixXd x(n, 8);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      labels[i] = i % 2;
      for (int j = 0; j < 8; ++j) x(i, j) = rng.normal() + (labels[i] ? 5.0 : 0.0);
    }
    const auto P = lf::conditionalAffinities(x, 30.0);
    for (int i = 0; i < n; ++i) worstEntropy = std::max(worstEntropy, std::abs(lf::rowEntropy(P.row(i)) - std::log(30.0)));
    lf::TsneConfig cfg;
    cfg.seed = seed;
    const auto e = lf::tsneEmbed(x, labels, cfg);
    double intra = 0, inter = 0;
    long ni = 0, ne = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const double d = (e.points.row(i) - e.points.row(j)).norm();
        if (labels[i] == labels[j]) intra += d, ++ni;
        else inter += d, ++ne;
      }
    separated += intra / ni < inter / ne;
  }
  c.require(worstEntropy < 1e-4, "perplexity calibration entropy error >= 1e-4");
  c.require(separated >= 9, "blobs separated in fewer than 9 of 10 seeds");
  c.note("%.0f/10 seeds separated, entropy error %.1e", separated, worstEntropy);
  return c.outcome();
}

}  // namespace

int main() {
  run("hypervolume oracle equivalence", 30, hypervolumeOracle);
  run("EHVI quadrature check", 10, ehviQuadrature);
  run("GP correctness", 30, gpCorrectness);
  run("neural gradient check", 30, neuralGradient);
  run("Sobol-ball geometry", 10, sobolBall);
  run("corpus determinism and structure", 120, corpusStructure);
  run("InfoGAN smoke training", 900, ganSmoke);
  run("surrogate physics", 30, surrogatePhysics);
  run("end-to-end optimization vs Sobol baseline", 1200, endToEnd);
  run("interpretability estimator", 120, interpretability);
  run("t-SNE sanity", 120, tsneSanity);
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
