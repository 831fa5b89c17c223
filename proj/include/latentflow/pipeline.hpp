#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "latentflow/config.hpp"

namespace latentflow {

/// A required upstream artifact is absent or was produced under a different config.
struct UpstreamMissing : Error {
  using Error::Error;
};

struct CommandOptions {
  std::filesystem::path outDir;  ///< artifact root; empty uses the config's [paths] out
  bool force = false;            ///< accept upstream artifacts whose config hash differs
  std::ostream* log = nullptr;   ///< progress messages
};

// Each command reads its upstream artifacts from and writes its outputs under the
// artifact root:
//   corpus/     manifest.txt, rasters.lfrd, provenance.csv, tables/*.csv, archetypes.txt, sample_sheet.png
//   model/      generator.lfnn, discriminator.lfnn, auxiliary.lfnn, model.txt, history.csv
//   viz/        embedding.csv, kl.csv, tsne.svg
//   doe/        doe.csv, doe_sheet.png
//   optimize/   history.csv, pareto.csv, acquisition.csv, frontier.svg, gp_f1.txt, gp_f2.txt
//   interpret/  probabilities.csv, histograms.csv, marginal_x<j>.svg
// Every text artifact starts with a "config_hash" provenance line.
void cmdSynth(const PipelineConfig& cfg, const CommandOptions& opts);
void cmdTrain(const PipelineConfig& cfg, const CommandOptions& opts);
void cmdViz(const PipelineConfig& cfg, const CommandOptions& opts);
void cmdDoe(const PipelineConfig& cfg, const CommandOptions& opts);
void cmdOptimize(const PipelineConfig& cfg, const CommandOptions& opts);
void cmdInterpret(const PipelineConfig& cfg, const CommandOptions& opts);
/// Re-renders every SVG figure from the CSV artifacts that exist.
void cmdPlot(const PipelineConfig& cfg, const CommandOptions& opts);

/// Exit status for an exception escaping a command: 2 configuration, 3 upstream
/// missing, 4 numeric failure, 1 anything else.
int exitCodeFor(const std::exception& e);

/// Reads the "config_hash" provenance value from the head of an artifact, if any.
std::string readArtifactHash(const std::filesystem::path& path);

}  // namespace latentflow
