#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "latentflow/geometry.hpp"
#include "latentflow/raster.hpp"

namespace latentflow {

enum class MixingPreset { SelfPairs, AllPairs, RandomK };

std::string_view presetName(MixingPreset p);
MixingPreset parsePreset(std::string_view name);

struct MixingPlan {
  MixingPreset preset = MixingPreset::RandomK;
  int k = 2000;  ///< pair count for RandomK
  std::uint64_t seed = 1;

  friend bool operator==(const MixingPlan&, const MixingPlan&) = default;
};

struct CorpusManifest {
  int resolution = 32;
  int rowsPerArchetype = 25;
  std::uint64_t tableSeed = 0;
  MixingPlan plan;
  std::map<std::string, int> halvesPerArchetype;  ///< instantiated (not skipped) halves
  int designCount = 0;
  int skippedHalves = 0;
  int skippedDesigns = 0;
  std::map<std::string, std::string> extra;  ///< free-form keys (e.g. config hash)

  int halfCount() const;
};

struct Corpus {
  std::vector<RasterDesign> designs;
  CorpusManifest manifest;
};

using CorpusLog = std::function<void(const std::string&)>;

/// One design table per archetype, rowsPerArchetype rows each.
std::vector<DesignTable> sampleAllDesignTables(int rowsPerArchetype, std::uint64_t seed);

/// Instantiates every table row, pairs left halves with mirrored right halves
/// according to the plan and rasterizes each pair. Infeasible halves or pairs are
/// skipped and counted; more than 10% skipped fails the build.
Corpus buildCorpus(const std::vector<DesignTable>& tables, const MixingPlan& plan, int resolution,
                   const CorpusLog& log = {});

std::string formatManifest(const CorpusManifest& manifest);
CorpusManifest parseManifest(const std::string& text);

/// Writes manifest.txt, rasters.lfrd and provenance.csv into dir.
void writeCorpus(const std::filesystem::path& dir, const Corpus& corpus);
Corpus readCorpus(const std::filesystem::path& dir);

}  // namespace latentflow
