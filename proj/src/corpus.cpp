#include "latentflow/corpus.hpp"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "latentflow/errors.hpp"
#include "latentflow/rng.hpp"

namespace latentflow {

std::string_view presetName(MixingPreset p) {
  switch (p) {
    case MixingPreset::SelfPairs: return "self-pairs";
    case MixingPreset::AllPairs: return "all-pairs";
    case MixingPreset::RandomK: return "random-k";
  }
  return "?";
}

MixingPreset parsePreset(std::string_view name) {
  for (auto p : {MixingPreset::SelfPairs, MixingPreset::AllPairs, MixingPreset::RandomK})
    if (presetName(p) == name) return p;
  throw FormatError("unknown mixing preset '" + std::string(name) + "'");
}

int CorpusManifest::halfCount() const {
  int n = 0;
  for (const auto& [name, count] : halvesPerArchetype) n += count;
  return n;
}

std::vector<DesignTable> sampleAllDesignTables(int rowsPerArchetype, std::uint64_t seed) {
  std::vector<DesignTable> tables;
  for (const auto& spec : listArchetypes()) tables.push_back(sampleDesignTable(spec, rowsPerArchetype, seed));
  return tables;
}

Corpus buildCorpus(const std::vector<DesignTable>& tables, const MixingPlan& plan, int resolution,
                   const CorpusLog& log) {
  std::set<ArchetypeId> covered;
  for (const auto& t : tables) covered.insert(t.archetype);
  if (static_cast<int>(covered.size()) != kArchetypeCount) throw DomainError("design tables must cover all archetypes");

  Corpus corpus;
  auto& manifest = corpus.manifest;
  manifest.resolution = resolution;
  manifest.rowsPerArchetype = tables.empty() ? 0 : static_cast<int>(tables.front().rows.rows());
  manifest.tableSeed = tables.empty() ? 0 : tables.front().seed;
  manifest.plan = plan;

  struct Half {
    HalfGeometry left;
    HalfGeometry right;
    HalfProvenance provenance;
  };
  std::vector<Half> halves;
  int requestedHalves = 0;
  for (const auto& table : tables) {
    const auto& spec = archetypeSpec(table.archetype);
    auto& count = manifest.halvesPerArchetype[std::string(archetypeName(table.archetype))];
    for (Eigen::Index row = 0; row < table.rows.rows(); ++row) {
      ++requestedHalves;
      try {
        HalfGeometry h = instantiate(spec, table.rows.row(row).transpose());
        HalfGeometry m = mirror(h);
        halves.push_back({std::move(h), std::move(m), {table.archetype, static_cast<int>(row)}});
        ++count;
      } catch (const InfeasibleGeometry& e) {
        ++manifest.skippedHalves;
        if (log) log("skipped " + std::string(archetypeName(table.archetype)) + " row " + std::to_string(row) + ": " + e.what());
      }
    }
  }
  if (manifest.skippedHalves * 10 > requestedHalves)
    throw InfeasibleGeometry("more than 10% of design-table rows are infeasible");

  const std::size_t n = halves.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  switch (plan.preset) {
    case MixingPreset::SelfPairs:
      for (std::size_t i = 0; i < n; ++i) pairs.emplace_back(i, i);
      break;
    case MixingPreset::AllPairs:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) pairs.emplace_back(i, j);
      break;
    case MixingPreset::RandomK: {
      const std::size_t total = n * n;
      if (plan.k < 1 || static_cast<std::size_t>(plan.k) > total)
        throw DomainError("random-k pair count must be in [1, halves^2]");
      std::vector<std::size_t> index(total);
      std::iota(index.begin(), index.end(), std::size_t{0});
      Rng rng({plan.seed, 0x9a1e5ULL});
      for (std::size_t i = 0; i < static_cast<std::size_t>(plan.k); ++i)
        std::swap(index[i], index[i + rng.below(total - i)]);
      for (std::size_t i = 0; i < static_cast<std::size_t>(plan.k); ++i) pairs.emplace_back(index[i] / n, index[i] % n);
      break;
    }
  }

  for (const auto& [li, ri] : pairs) {
    try {
      RasterDesign r = rasterize(mix(halves[li].left, halves[ri].right), resolution);
      r.provenance = {halves[li].provenance, halves[ri].provenance};
      corpus.designs.push_back(std::move(r));
    } catch (const Error& e) {
      ++manifest.skippedDesigns;
      if (log)
        log("skipped pair (" + std::to_string(li) + "," + std::to_string(ri) + "): " + e.what());
    }
  }
  if (manifest.skippedDesigns * 10 > static_cast<int>(pairs.size()))
    throw ResolutionTooCoarse("more than 10% of mixed designs failed to rasterize");
  manifest.designCount = static_cast<int>(corpus.designs.size());
  return corpus;
}

std::string formatManifest(const CorpusManifest& m) {
  std::ostringstream out;
  out << "resolution = " << m.resolution << "\n";
  out << "rows_per_archetype = " << m.rowsPerArchetype << "\n";
  out << "table_seed = " << m.tableSeed << "\n";
  out << "mixing_preset = " << presetName(m.plan.preset) << "\n";
  out << "mixing_k = " << m.plan.k << "\n";
  out << "mixing_seed = " << m.plan.seed << "\n";
  for (const auto& [name, count] : m.halvesPerArchetype) out << "halves." << name << " = " << count << "\n";
  out << "designs = " << m.designCount << "\n";
  out << "skipped_halves = " << m.skippedHalves << "\n";
  out << "skipped_designs = " << m.skippedDesigns << "\n";
  for (const auto& [key, value] : m.extra) out << key << " = " << value << "\n";
  return out.str();
}

CorpusManifest parseManifest(const std::string& text) {
  CorpusManifest m;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw FormatError("manifest line without ' = ': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 3);
    try {
      if (key == "resolution") m.resolution = std::stoi(value);
      else if (key == "rows_per_archetype") m.rowsPerArchetype = std::stoi(value);
      else if (key == "table_seed") m.tableSeed = std::stoull(value);
      else if (key == "mixing_preset") m.plan.preset = parsePreset(value);
      else if (key == "mixing_k") m.plan.k = std::stoi(value);
      else if (key == "mixing_seed") m.plan.seed = std::stoull(value);
      else if (key.rfind("halves.", 0) == 0) m.halvesPerArchetype[key.substr(7)] = std::stoi(value);
      else if (key == "designs") m.designCount = std::stoi(value);
      else if (key == "skipped_halves") m.skippedHalves = std::stoi(value);
      else if (key == "skipped_designs") m.skippedDesigns = std::stoi(value);
      else m.extra[key] = value;
    } catch (const std::logic_error&) {
      throw FormatError("bad manifest value for " + key);
    }
  }
  return m;
}

void writeCorpus(const std::filesystem::path& dir, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "manifest.txt");
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << formatManifest(corpus.manifest);
  }
  writeRasterSet(dir / "rasters.lfrd", corpus.designs);
  std::ofstream prov(dir / "provenance.csv");
  if (!prov) throw IoError("cannot write provenance.csv");
  prov << "index,left_archetype,left_row,right_archetype,right_row\n";
  for (std::size_t i = 0; i < corpus.designs.size(); ++i) {
    const auto& p = corpus.designs[i].provenance;
    prov << i << "," << archetypeName(p.left.archetype) << "," << p.left.row << "," << archetypeName(p.right.archetype)
         << "," << p.right.row << "\n";
  }
}

Corpus readCorpus(const std::filesystem::path& dir) {
  Corpus corpus;
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw IoError("missing " + (dir / "manifest.txt").string());
  std::stringstream buf;
  buf << manifest.rdbuf();
  corpus.manifest = parseManifest(buf.str());
  corpus.designs = readRasterSet(dir / "rasters.lfrd");
  if (static_cast<int>(corpus.designs.size()) != corpus.manifest.designCount)
    throw FormatError("manifest design count disagrees with raster file");

  std::ifstream prov(dir / "provenance.csv");
  if (!prov) throw IoError("missing provenance.csv");
  std::string line;
  std::getline(prov, line);
  for (auto& design : corpus.designs) {
    if (!std::getline(prov, line)) throw FormatError("provenance.csv shorter than raster set");
    std::stringstream row(line);
    std::string field[5];
    for (auto& f : field) std::getline(row, f, ',');
    const auto la = parseArchetype(field[1]);
    const auto ra = parseArchetype(field[3]);
    if (!la || !ra) throw FormatError("bad archetype in provenance.csv");
    design.provenance = {{*la, std::stoi(field[2])}, {*ra, std::stoi(field[4])}};
  }
  return corpus;
}

}  // namespace latentflow
