#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "latentflow/corpus.hpp"
#include "latentflow/errors.hpp"
#include "latentflow/infogan.hpp"
#include "latentflow/mobo.hpp"
#include "latentflow/tsne.hpp"

namespace latentflow {

/// Raised for malformed or invalid configuration text.
struct ConfigError : Error {
  using Error::Error;
};

/// Flat INI text: "[section]" headers, "key = value" lines, '#' or ';' comments.
using IniSections = std::map<std::string, std::map<std::string, std::string>>;
IniSections parseIni(std::string_view text);

struct CorpusSettings {
  int resolution = 32;
  int rowsPerArchetype = 25;
  std::uint64_t tableSeed = 1;
  MixingPlan plan;

  friend bool operator==(const CorpusSettings&, const CorpusSettings&) = default;
};

struct GanSettings {
  int latentDim = 8;
  int epochs = 300;
  int batchSize = 64;
  double learningRate = 2e-4;
  double beta1 = 0.5;
  double infoWeight = 1.0;
  int probeCount = 32;
  std::uint64_t seed = 1;

  friend bool operator==(const GanSettings&, const GanSettings&) = default;
};

struct VizSettings {
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 1;

  friend bool operator==(const VizSettings&, const VizSettings&) = default;
};

struct MoboSettings {
  int initial = 20;
  int batches = 3;
  int batchSize = 5;
  int mcSamples = 256;
  int restarts = 32;
  int gpRestarts = 8;
  double radius = kLatentRadius;
  std::uint64_t seed = 1;

  friend bool operator==(const MoboSettings&, const MoboSettings&) = default;
};

struct InterpretSettings {
  int candidates = 4096;
  int draws = 256;
  int bins = 20;
  std::uint64_t seed = 1;

  friend bool operator==(const InterpretSettings&, const InterpretSettings&) = default;
};

enum class Stage { Synth, Train, Viz, Doe, Optimize, Interpret };

struct PipelineConfig {
  CorpusSettings corpus;
  GanSettings gan;
  VizSettings viz;
  MoboSettings mobo;
  InterpretSettings interpret;
  std::string outDir = "run";

  /// Every seed key is mandatory; unknown keys and out-of-range values are rejected.
  static PipelineConfig parse(std::string_view text);
  static PipelineConfig load(const std::string& path);
  std::string serialize() const;

  /// Hash of exactly the settings that determine a stage's artifacts (paths excluded).
  std::string stageHash(Stage stage) const;
  /// Replaces every seed with the given value.
  void overrideSeeds(std::uint64_t seed);

  InfoGanConfig ganConfig() const;
  TsneConfig tsneConfig() const;
  LoopConfig loopConfig() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

std::string_view stageName(Stage stage);

/// 64-bit FNV-1a digest rendered as 16 hex digits.
std::string fnv1aHex(std::string_view text);

}  // namespace latentflow
