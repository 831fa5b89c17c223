#include "latentflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace latentflow {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string formatDouble(double v) {
  // Shortest text that parses back to the same double.
  char buf[64];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Reads the known keys of one section, rejecting unknown ones and missing required ones.
class SectionReader {
public:
  SectionReader(const IniSections& ini, const std::string& name) : name_(name) {
    if (auto it = ini.find(name); it != ini.end()) values_ = &it->second;
  }
  ~SectionReader() = default;

  void integer(const std::string& key, int& out, int minimum, bool required = false) {
    if (auto v = take(key, required)) {
      int parsed = 0;
      const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
      if (ec != std::errc() || ptr != v->data() + v->size()) fail(key, "expected an integer");
      if (parsed < minimum) fail(key, "must be at least " + std::to_string(minimum));
      out = parsed;
    }
  }
  void seed(const std::string& key, std::uint64_t& out) {
    auto v = take(key, true);
    std::uint64_t parsed = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
    if (ec != std::errc() || ptr != v->data() + v->size()) fail(key, "expected a non-negative integer seed");
    out = parsed;
  }
  void real(const std::string& key, double& out, const std::function<bool(double)>& valid, const char* rule) {
    if (auto v = take(key, false)) {
      char* end = nullptr;
      const double parsed = std::strtod(v->c_str(), &end);
      if (v->empty() || end != v->c_str() + v->size()) fail(key, "expected a number");
      if (!valid(parsed)) fail(key, rule);
      out = parsed;
    }
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = take(key, false)) out = *v;
  }
  void finish() const {
    if (!values_) return;
    for (const auto& [key, value] : *values_)
      if (!used_.count(key)) throw ConfigError("unknown key [" + name_ + "] " + key);
  }

private:
  std::optional<std::string> take(const std::string& key, bool required) {
    used_.insert(key);
    if (values_)
      if (auto it = values_->find(key); it != values_->end()) return it->second;
    if (required) throw ConfigError("missing required key [" + name_ + "] " + key);
    return std::nullopt;
  }
  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError("[" + name_ + "] " + key + ": " + why);
  }

  std::string name_;
  const std::map<std::string, std::string>* values_ = nullptr;
  std::set<std::string> used_;
};

const auto positive = [](double v) { return v > 0.0; };

}  // namespace

IniSections parseIni(std::string_view text) {
  IniSections out;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineNo) + ": unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("line " + std::to_string(lineNo) + ": empty section name");
      if (out.count(section)) throw ConfigError("duplicate section [" + section + "]");
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineNo) + ": expected key = value");
    if (section.empty()) throw ConfigError("line " + std::to_string(lineNo) + ": key outside any section");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineNo) + ": empty key");
    if (!out[section].emplace(key, value).second) throw ConfigError("duplicate key [" + section + "] " + key);
  }
  return out;
}

PipelineConfig PipelineConfig::parse(std::string_view text) {
  const IniSections ini = parseIni(text);
  static const std::set<std::string> known = {"corpus", "gan", "viz", "mobo", "interpret", "paths"};
  for (const auto& [name, values] : ini)
    if (!known.count(name)) throw ConfigError("unknown section [" + name + "]");

  PipelineConfig c;
  {
    SectionReader r(ini, "corpus");
    r.integer("resolution", c.corpus.resolution, 16);
    r.integer("rows_per_archetype", c.corpus.rowsPerArchetype, 1);
    r.seed("table_seed", c.corpus.tableSeed);
    std::string mixing(presetName(c.corpus.plan.preset));
    r.text("mixing", mixing);
    try {
      c.corpus.plan.preset = parsePreset(mixing);
    } catch (const Error& e) {
      throw ConfigError(std::string("[corpus] mixing: ") + e.what());
    }
    r.integer("mix_k", c.corpus.plan.k, 1);
    r.seed("mix_seed", c.corpus.plan.seed);
    r.finish();
  }
  {
    SectionReader r(ini, "gan");
    r.integer("latent_dim", c.gan.latentDim, 1);
    r.integer("epochs", c.gan.epochs, 1);
    r.integer("batch_size", c.gan.batchSize, 2);
    r.real("learning_rate", c.gan.learningRate, positive, "must be positive");
    r.real("beta1", c.gan.beta1, [](double v) { return v >= 0.0 && v < 1.0; }, "must lie in [0,1)");
    r.real("info_weight", c.gan.infoWeight, [](double v) { return v >= 0.0; }, "must be non-negative");
    r.integer("probe_count", c.gan.probeCount, 1);
    r.seed("seed", c.gan.seed);
    r.finish();
  }
  {
    SectionReader r(ini, "viz");
    r.real("perplexity", c.viz.perplexity, [](double v) { return v >= 2.0; }, "must be at least 2");
    r.integer("iterations", c.viz.iterations, 1);
    r.seed("seed", c.viz.seed);
    r.finish();
  }
  {
    SectionReader r(ini, "mobo");
    r.integer("initial", c.mobo.initial, 2);
    r.integer("batches", c.mobo.batches, 1);
    r.integer("batch_size", c.mobo.batchSize, 1);
    r.integer("mc_samples", c.mobo.mcSamples, 1);
    r.integer("restarts", c.mobo.restarts, 1);
    r.integer("gp_restarts", c.mobo.gpRestarts, 1);
    r.real("radius", c.mobo.radius, positive, "must be positive");
    r.seed("seed", c.mobo.seed);
    r.finish();
  }
  {
    SectionReader r(ini, "interpret");
    r.integer("candidates", c.interpret.candidates, 2);
    r.integer("draws", c.interpret.draws, 1);
    r.integer("bins", c.interpret.bins, 2);
    r.seed("seed", c.interpret.seed);
    r.finish();
  }
  {
    SectionReader r(ini, "paths");
    r.text("out", c.outDir);
    r.finish();
    if (c.outDir.empty()) throw ConfigError("[paths] out must not be empty");
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

namespace {

std::string corpusSection(const PipelineConfig& c) {
  std::ostringstream o;
  o << "[corpus]\n"
    << "resolution = " << c.corpus.resolution << "\n"
    << "rows_per_archetype = " << c.corpus.rowsPerArchetype << "\n"
    << "table_seed = " << c.corpus.tableSeed << "\n"
    << "mixing = " << presetName(c.corpus.plan.preset) << "\n"
    << "mix_k = " << c.corpus.plan.k << "\n"
    << "mix_seed = " << c.corpus.plan.seed << "\n";
  return o.str();
}

std::string ganSection(const PipelineConfig& c) {
  std::ostringstream o;
  o << "[gan]\n"
    << "latent_dim = " << c.gan.latentDim << "\n"
    << "epochs = " << c.gan.epochs << "\n"
    << "batch_size = " << c.gan.batchSize << "\n"
    << "learning_rate = " << formatDouble(c.gan.learningRate) << "\n"
    << "beta1 = " << formatDouble(c.gan.beta1) << "\n"
    << "info_weight = " << formatDouble(c.gan.infoWeight) << "\n"
    << "probe_count = " << c.gan.probeCount << "\n"
    << "seed = " << c.gan.seed << "\n";
  return o.str();
}

std::string vizSection(const PipelineConfig& c) {
  std::ostringstream o;
  o << "[viz]\n"
    << "perplexity = " << formatDouble(c.viz.perplexity) << "\n"
    << "iterations = " << c.viz.iterations << "\n"
    << "seed = " << c.viz.seed << "\n";
  return o.str();
}

std::string moboSection(const PipelineConfig& c) {
  std::ostringstream o;
  o << "[mobo]\n"
    << "initial = " << c.mobo.initial << "\n"
    << "batches = " << c.mobo.batches << "\n"
    << "batch_size = " << c.mobo.batchSize << "\n"
    << "mc_samples = " << c.mobo.mcSamples << "\n"
    << "restarts = " << c.mobo.restarts << "\n"
    << "gp_restarts = " << c.mobo.gpRestarts << "\n"
    << "radius = " << formatDouble(c.mobo.radius) << "\n"
    << "seed = " << c.mobo.seed << "\n";
  return o.str();
}

std::string interpretSection(const PipelineConfig& c) {
  std::ostringstream o;
  o << "[interpret]\n"
    << "candidates = " << c.interpret.candidates << "\n"
    << "draws = " << c.interpret.draws << "\n"
    << "bins = " << c.interpret.bins << "\n"
    << "seed = " << c.interpret.seed << "\n";
  return o.str();
}

}  // namespace

std::string PipelineConfig::serialize() const {
  return corpusSection(*this) + "\n" + ganSection(*this) + "\n" + vizSection(*this) + "\n" + moboSection(*this) +
         "\n" + interpretSection(*this) + "\n[paths]\nout = " + outDir + "\n";
}

std::string PipelineConfig::stageHash(Stage stage) const {
  std::string text = corpusSection(*this);
  switch (stage) {
    case Stage::Synth: break;
    case Stage::Train: text += ganSection(*this); break;
    case Stage::Viz: text += ganSection(*this) + vizSection(*this); break;
    case Stage::Doe:
    case Stage::Optimize: text += ganSection(*this) + moboSection(*this); break;
    case Stage::Interpret: text += ganSection(*this) + moboSection(*this) + interpretSection(*this); break;
  }
  return fnv1aHex(std::string(stageName(stage)) + "\n" + text);
}

void PipelineConfig::overrideSeeds(std::uint64_t seed) {
  corpus.tableSeed = seed;
  corpus.plan.seed = seed;
  gan.seed = seed;
  viz.seed = seed;
  mobo.seed = seed;
  interpret.seed = seed;
}

InfoGanConfig PipelineConfig::ganConfig() const {
  InfoGanConfig g;
  g.latentDim = gan.latentDim;
  g.epochs = gan.epochs;
  g.batchSize = gan.batchSize;
  g.learningRate = gan.learningRate;
  g.beta1 = gan.beta1;
  g.infoWeight = gan.infoWeight;
  g.probeCount = gan.probeCount;
  g.seed = gan.seed;
  return g;
}

TsneConfig PipelineConfig::tsneConfig() const {
  TsneConfig t;
  t.perplexity = viz.perplexity;
  t.iterations = viz.iterations;
  t.exaggerationIterations = std::min(250, viz.iterations);
  t.seed = viz.seed;
  return t;
}

LoopConfig PipelineConfig::loopConfig() const {
  LoopConfig l;
  l.latentDim = gan.latentDim;
  l.initial = mobo.initial;
  l.batches = mobo.batches;
  l.batchSize = mobo.batchSize;
  l.mcSamples = mobo.mcSamples;
  l.restarts = mobo.restarts;
  l.gpRestarts = mobo.gpRestarts;
  l.radius = mobo.radius;
  l.seed = mobo.seed;
  return l;
}

std::string_view stageName(Stage stage) {
  switch (stage) {
    case Stage::Synth: return "synth";
    case Stage::Train: return "train";
    case Stage::Viz: return "viz";
    case Stage::Doe: return "doe";
    case Stage::Optimize: return "optimize";
    case Stage::Interpret: return "interpret";
  }
  return "?";
}

std::string fnv1aHex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace latentflow
