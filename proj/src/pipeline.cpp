#include "latentflow/pipeline.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "latentflow/geometry.hpp"
#include "latentflow/interpret.hpp"
#include "latentflow/pareto.hpp"
#include "latentflow/rng.hpp"
#include "latentflow/surrogate.hpp"

namespace latentflow {

namespace {

namespace fs = std::filesystem;

const char* const kHashKey = "config_hash";

fs::path root(const PipelineConfig& cfg, const CommandOptions& opts) {
  return opts.outDir.empty() ? fs::path(cfg.outDir) : opts.outDir;
}

void say(const CommandOptions& opts, const std::string& msg) {
  if (opts.log) *opts.log << msg << '\n';
}

std::string stamp(const std::string& hash) { return std::string("# ") + kHashKey + "=" + hash + "\n"; }

void writeText(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

void writeCsv(const fs::path& path, const std::string& hash, const std::string& body) {
  writeText(path, stamp(hash) + body);
}

void writeSvg(const fs::path& path, const std::string& hash, const std::string& svg) {
  // Provenance comment goes right after the XML declaration.
  const auto nl = svg.find('\n');
  writeText(path, svg.substr(0, nl + 1) + "<!-- " + kHashKey + "=" + hash + " -->\n" + svg.substr(nl + 1));
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

// Ensures an upstream artifact exists and was produced by the current config.
void requireUpstream(const fs::path& path, const std::string& expectedHash, const std::string& producer,
                     const CommandOptions& opts) {
  if (!fs::exists(path))
    throw UpstreamMissing("missing " + path.string() + "; run `latentflow " + producer + "` first");
  const std::string found = readArtifactHash(path);
  if (found != expectedHash) {
    if (opts.force) {
      say(opts, "warning: " + path.string() + " was produced under a different config (forced)");
      return;
    }
    throw UpstreamMissing(path.string() + " was produced under config hash '" + found + "' but the current config gives '" +
                          expectedHash + "'; rerun `latentflow " + producer + "` or pass --force");
  }
}

std::vector<std::string> archetypeLabels() {
  std::vector<std::string> names;
  for (const auto& spec : listArchetypes()) names.emplace_back(archetypeName(spec.id));
  return names;
}

InfoGanModel loadModel(const PipelineConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = root(cfg, opts) / "model";
  requireUpstream(dir / "model.txt", cfg.stageHash(Stage::Train), "train", opts);
  InfoGanModel model = InfoGanModel::load(dir);
  if (model.latentDim() != cfg.gan.latentDim)
    throw UpstreamMissing("model latent dimension " + std::to_string(model.latentDim()) +
                          " differs from [gan] latent_dim; rerun `latentflow train`");
  return model;
}

Evaluator designEvaluator(const InfoGanModel& model) {
  return [&model](const Eigen::MatrixXd& X) {
    const auto generated = model.generate(X);
    std::vector<std::optional<Eigen::VectorXd>> out;
    for (const auto& raster : generated.rasters) {
      try {
        const FlowObjectives f = evaluateDesign(raster);
        out.emplace_back(Eigen::Vector2d(f.nonUniformity, f.resistance));
      } catch (const Error&) {
        out.emplace_back(std::nullopt);
      }
    }
    return out;
  };
}

// Minimal CSV reader for our own artifacts: skips '#' lines, returns header + rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> comments;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw FormatError("CSV lacks column " + name);
  }
};

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

CsvTable readCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) t.comments[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (t.header.empty()) t.header = splitCsv(line);
    else t.rows.push_back(splitCsv(line));
  }
  return t;
}

std::string referenceComment(const Eigen::VectorXd& r) {
  std::ostringstream o;
  o.precision(17);
  o << "# reference=";
  for (Eigen::Index k = 0; k < r.size(); ++k) o << (k ? ";" : "") << r(k);
  o << '\n';
  return o.str();
}

void renderFrontier(const fs::path& dir, const std::string& hash, const OptimizationHistory& h) {
  writeSvg(dir / "frontier.svg", hash, frontierSvg(h, "f1: flow non-uniformity", "f2: hydraulic resistance"));
}

void renderMarginals(const fs::path& dir, const std::string& hash, const std::vector<MarginalHistogram>& hists) {
  for (const auto& h : hists)
    writeSvg(dir / ("marginal_x" + std::to_string(h.dimension) + ".svg"), hash, marginalSvg(h));
}

}  // namespace

std::string readArtifactHash(const fs::path& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::string line;
  for (int i = 0; i < 64 && std::getline(in, line); ++i) {
    const auto at = line.find(kHashKey);
    if (at == std::string::npos) continue;
    auto rest = line.substr(at + std::string(kHashKey).size());
    const auto b = rest.find_first_not_of(" =");
    if (b == std::string::npos) return {};
    rest = rest.substr(b);
    const auto e = rest.find_first_of(" \r-");
    return rest.substr(0, e);
  }
  return {};
}

void cmdSynth(const PipelineConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = root(cfg, opts) / "corpus";
  const std::string hash = cfg.stageHash(Stage::Synth);
  const auto tables = sampleAllDesignTables(cfg.corpus.rowsPerArchetype, cfg.corpus.tableSeed);
  Corpus corpus = buildCorpus(tables, cfg.corpus.plan, cfg.corpus.resolution,
                              [&](const std::string& m) { say(opts, m); });
  corpus.manifest.extra[kHashKey] = hash;
  writeCorpus(dir, corpus);
  writeText(dir / "archetypes.txt", stamp(hash) + archetypeManifest(listArchetypes()));
  for (const auto& table : tables) {
    const auto& spec = archetypeSpec(table.archetype);
    writeCsv(dir / "tables" / (std::string(archetypeName(table.archetype)) + ".csv"), hash,
             render([&](std::ostream& o) { writeDesignTableCsv(o, table, spec); }));
  }
  const std::size_t shown = std::min<std::size_t>(corpus.designs.size(), 64);
  writeRasterSheetPng(dir / "sample_sheet.png",
                      std::vector<RasterDesign>(corpus.designs.begin(), corpus.designs.begin() + shown), 8, 4,
                      std::string(kHashKey) + "=" + hash);
  say(opts, "synth: " + std::to_string(corpus.designs.size()) + " designs from " +
                std::to_string(corpus.manifest.halfCount()) + " halves -> " + dir.string());
}

void cmdTrain(const PipelineConfig& cfg, const CommandOptions& opts) {
  const fs::path base = root(cfg, opts);
  requireUpstream(base / "corpus" / "manifest.txt", cfg.stageHash(Stage::Synth), "synth", opts);
  const Corpus corpus = readCorpus(base / "corpus");
  const std::string hash = cfg.stageHash(Stage::Train);
  const TrainResult result = trainInfoGan(corpus.designs, cfg.ganConfig(), [&](const EpochRecord& e) {
    if (e.modeCollapseWarning) say(opts, "warning: possible mode collapse at epoch " + std::to_string(e.epoch));
    if (e.epoch % 10 == 0 || e.epoch == 1) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "epoch %d  d_loss %.4f  g_loss %.4f  info %.4f  probe_rmse %.2f", e.epoch,
                    e.discriminatorLoss, e.generatorLoss, e.infoLoss, e.probeRmse);
      say(opts, buf);
    }
  });
  const fs::path dir = base / "model";
  writeCsv(dir / "history.csv", hash, render([&](std::ostream& o) { writeHistoryCsv(o, result.history); }));
  if (result.history.diverged) throw NumericFailure(result.history.message);
  result.model.save(dir, stamp(hash));
  say(opts, "train: model written to " + dir.string());
}

void cmdViz(const PipelineConfig& cfg, const CommandOptions& opts) {
  const fs::path base = root(cfg, opts);
  requireUpstream(base / "corpus" / "manifest.txt", cfg.stageHash(Stage::Synth), "synth", opts);
  const InfoGanModel model = loadModel(cfg, opts);
  const Corpus corpus = readCorpus(base / "corpus");
  const std::string hash = cfg.stageHash(Stage::Viz);
  std::vector<int> labels;
  for (const auto& d : corpus.designs) labels.push_back(static_cast<int>(d.provenance.left.archetype));
  const Embedding2D emb = tsneEmbed(model.encode(corpus.designs), labels, cfg.tsneConfig());
  const fs::path dir = base / "viz";
  const auto names = archetypeLabels();
  writeCsv(dir / "embedding.csv", hash, render([&](std::ostream& o) { writeEmbeddingCsv(o, emb, names); }));
  writeCsv(dir / "kl.csv", hash, render([&](std::ostream& o) {
             o << "iteration,kl\n";
             for (std::size_t i = 0; i < emb.klHistory.size(); ++i) o << i + 1 << ',' << emb.klHistory[i] << '\n';
           }));
  writeSvg(dir / "tsne.svg", hash, scatterSvg(emb, names));
  say(opts, "viz: embedded " + std::to_string(emb.points.rows()) + " latents -> " + dir.string());
}

void cmdDoe(const PipelineConfig& cfg, const CommandOptions& opts) {
  const InfoGanModel model = loadModel(cfg, opts);
  const std::string hash = cfg.stageHash(Stage::Doe);
  const Eigen::MatrixXd X = sobolBallDoe(cfg.gan.latentDim, cfg.mobo.initial, cfg.mobo.radius, cfg.mobo.seed);
  const auto generated = model.generate(X);
  const fs::path dir = root(cfg, opts) / "doe";
  writeCsv(dir / "doe.csv", hash, render([&](std::ostream& o) {
             o << "id";
             for (Eigen::Index j = 0; j < X.cols(); ++j) o << ",x" << j;
             o << ",norm\n";
             o.precision(10);
             for (Eigen::Index i = 0; i < X.rows(); ++i) {
               o << i;
               for (Eigen::Index j = 0; j < X.cols(); ++j) o << ',' << X(i, j);
               o << ',' << X.row(i).norm() << '\n';
             }
           }));
  writeRasterSheetPng(dir / "doe_sheet.png", generated.rasters, 5, 8, std::string(kHashKey) + "=" + hash);
  say(opts, "doe: " + std::to_string(X.rows()) + " designs -> " + dir.string());
}

void cmdOptimize(const PipelineConfig& cfg, const CommandOptions& opts) {
  const InfoGanModel model = loadModel(cfg, opts);
  const std::string hash = cfg.stageHash(Stage::Optimize);
  const OptimizationHistory h = runLoop(designEvaluator(model), cfg.loopConfig(), [&](const BatchRecord& b) {
    say(opts, "batch " + std::to_string(b.batch) + ": hypervolume " + std::to_string(b.hypervolume) + ", front size " +
                  std::to_string(b.archiveIds.size()));
  });
  const fs::path dir = root(cfg, opts) / "optimize";
  const std::string ref = h.reference.size() ? referenceComment(h.reference) : std::string();
  writeCsv(dir / "history.csv", hash, ref + render([&](std::ostream& o) { writeHistoryCsv(o, h); }));
  if (h.aborted) throw NumericFailure(h.message);
  writeCsv(dir / "pareto.csv", hash, render([&](std::ostream& o) { writeParetoCsv(o, h); }));
  writeCsv(dir / "acquisition.csv", hash, render([&](std::ostream& o) { writeAcquisitionCsv(o, h); }));
  renderFrontier(dir, hash, h);

  // Final emulators over every successful evaluation, for the interpretation stage.
  std::vector<const EvaluationRecord*> ok;
  for (const auto& e : h.evaluations)
    if (e.y) ok.push_back(&e);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(ok.size()), cfg.gan.latentDim);
  Eigen::MatrixXd Y(static_cast<Eigen::Index>(ok.size()), 2);
  for (std::size_t i = 0; i < ok.size(); ++i) {
    X.row(static_cast<Eigen::Index>(i)) = ok[i]->x.transpose();
    Y.row(static_cast<Eigen::Index>(i)) = ok[i]->y->transpose();
  }
  for (int k = 0; k < 2; ++k) {
    const GpModel gp = fitGp(X, Y.col(k), {cfg.mobo.gpRestarts, hashKeys({cfg.mobo.seed, 0xf1aULL, std::uint64_t(k)}), 400});
    writeText(dir / ("gp_f" + std::to_string(k + 1) + ".txt"), stamp(hash) + render([&](std::ostream& o) { gp.save(o); }));
  }
  say(opts, "optimize: final hypervolume " + std::to_string(h.finalHypervolume()) + " -> " + dir.string());
}

void cmdInterpret(const PipelineConfig& cfg, const CommandOptions& opts) {
  const fs::path base = root(cfg, opts);
  const std::string upstream = cfg.stageHash(Stage::Optimize);
  std::vector<GpModel> models;
  for (int k = 1; k <= 2; ++k) {
    const fs::path p = base / "optimize" / ("gp_f" + std::to_string(k) + ".txt");
    requireUpstream(p, upstream, "optimize", opts);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    models.push_back(GpModel::load(in));
  }
  const std::string hash = cfg.stageHash(Stage::Interpret);
  const Eigen::MatrixXd candidates =
      sobolBallDoe(cfg.gan.latentDim, cfg.interpret.candidates, cfg.mobo.radius, cfg.interpret.seed);
  const ParetoProbability pp = paretoProbability(models, candidates, cfg.interpret.draws, cfg.interpret.seed);
  const auto hists = marginalHistograms(pp, cfg.interpret.bins, -cfg.mobo.radius, cfg.mobo.radius);
  if (!hists.empty() && hists.front().uniformFallback)
    say(opts, "warning: every Pareto probability is zero; marginals use uniform weights");
  const fs::path dir = base / "interpret";
  writeCsv(dir / "probabilities.csv", hash, render([&](std::ostream& o) { writeProbabilityCsv(o, pp); }));
  writeCsv(dir / "histograms.csv", hash, render([&](std::ostream& o) { writeHistogramCsv(o, hists); }));
  renderMarginals(dir, hash, hists);
  say(opts, "interpret: " + std::to_string(candidates.rows()) + " candidates, " + std::to_string(pp.draws) +
                " draws -> " + dir.string());
}

void cmdPlot(const PipelineConfig& cfg, const CommandOptions& opts) {
  const fs::path base = root(cfg, opts);
  int rendered = 0;
  if (const fs::path p = base / "viz" / "embedding.csv"; fs::exists(p)) {
    const CsvTable t = readCsv(p);
    const auto names = archetypeLabels();
    Embedding2D emb;
    emb.points.resize(static_cast<Eigen::Index>(t.rows.size()), 2);
    const int cx = t.column("x"), cy = t.column("y"), cl = t.column("label");
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      emb.points(static_cast<Eigen::Index>(i), 0) = std::stod(t.rows[i].at(static_cast<std::size_t>(cx)));
      emb.points(static_cast<Eigen::Index>(i), 1) = std::stod(t.rows[i].at(static_cast<std::size_t>(cy)));
      const auto id = parseArchetype(t.rows[i].at(static_cast<std::size_t>(cl)));
      emb.labels.push_back(id ? static_cast<int>(*id) : -1);
    }
    writeSvg(base / "viz" / "tsne.svg", readArtifactHash(p), scatterSvg(emb, names));
    ++rendered;
  }
  if (const fs::path p = base / "optimize" / "history.csv"; fs::exists(p)) {
    const CsvTable t = readCsv(p);
    OptimizationHistory h;
    if (auto it = t.comments.find("reference"); it != t.comments.end()) {
      std::vector<double> r;
      std::stringstream ss(it->second);
      std::string cell;
      while (std::getline(ss, cell, ';')) r.push_back(std::stod(cell));
      h.reference = Eigen::Map<Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(r.size()));
    }
    const int cb = t.column("batch"), ci = t.column("eval_id"), f1 = t.column("f1"), f2 = t.column("f2");
    for (const auto& row : t.rows) {
      EvaluationRecord e;
      e.batch = std::stoi(row.at(static_cast<std::size_t>(cb)));
      e.id = std::stoi(row.at(static_cast<std::size_t>(ci)));
      const std::string a = row.at(static_cast<std::size_t>(f1)), b = row.at(static_cast<std::size_t>(f2));
      if (a != "nan" && b != "nan") e.y = Eigen::Vector2d(std::stod(a), std::stod(b));
      h.evaluations.push_back(std::move(e));
    }
    if (h.reference.size() == 2) {
      std::vector<int> ids;
      const Eigen::MatrixXd Y = h.insideObjectives(&ids);
      BatchRecord last;
      for (Eigen::Index i : paretoFilter(Y)) last.archiveIds.push_back(ids[static_cast<std::size_t>(i)]);
      h.batches.push_back(last);
    }
    renderFrontier(base / "optimize", readArtifactHash(p), h);
    ++rendered;
  }
  if (const fs::path p = base / "interpret" / "histograms.csv"; fs::exists(p)) {
    const CsvTable t = readCsv(p);
    std::map<int, std::vector<std::array<double, 3>>> bins;
    const int cd = t.column("dimension"), lo = t.column("lower"), hi = t.column("upper"), cm = t.column("mass");
    for (const auto& row : t.rows)
      bins[std::stoi(row.at(static_cast<std::size_t>(cd)))].push_back(
          {std::stod(row.at(static_cast<std::size_t>(lo))), std::stod(row.at(static_cast<std::size_t>(hi))),
           std::stod(row.at(static_cast<std::size_t>(cm)))});
    std::vector<MarginalHistogram> hists;
    for (const auto& [dim, rows] : bins) {
      MarginalHistogram h;
      h.dimension = dim;
      h.lower = rows.front()[0];
      h.upper = rows.back()[1];
      h.mass.resize(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t b = 0; b < rows.size(); ++b) h.mass(static_cast<Eigen::Index>(b)) = rows[b][2];
      hists.push_back(std::move(h));
    }
    renderMarginals(base / "interpret", readArtifactHash(p), hists);
    ++rendered;
  }
  if (rendered == 0)
    throw UpstreamMissing("nothing to plot under " + base.string() + "; run `latentflow viz`, `optimize` or `interpret`");
  say(opts, "plot: re-rendered " + std::to_string(rendered) + " figure group(s)");
}

int exitCodeFor(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
  if (dynamic_cast<const UpstreamMissing*>(&e)) return 3;
  if (dynamic_cast<const NumericFailure*>(&e)) return 4;
  return 1;
}

}  // namespace latentflow
