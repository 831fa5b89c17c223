#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "latentflow/corpus.hpp"
#include "latentflow/errors.hpp"

namespace lf = latentflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Corpus, SelfPairsAreSymmetric) {
  const auto tables = lf::sampleAllDesignTables(25, 1);
  lf::MixingPlan plan{lf::MixingPreset::SelfPairs, 0, 1};
  const auto corpus = lf::buildCorpus(tables, plan, 32);
  EXPECT_EQ(corpus.manifest.halfCount() + corpus.manifest.skippedHalves, 125);
  EXPECT_EQ(corpus.designs.size(), static_cast<std::size_t>(corpus.manifest.halfCount() - corpus.manifest.skippedDesigns));
  for (const auto& z : corpus.designs) {
    EXPECT_EQ(z.provenance.left, z.provenance.right);
    EXPECT_EQ(lf::flipHorizontal(z).classes, z.classes);
    EXPECT_FALSE(lf::checkRaster(z).has_value());
  }
}

TEST(Corpus, RandomPairsAreUnique) {
  const auto tables = lf::sampleAllDesignTables(25, 1);
  lf::MixingPlan plan{lf::MixingPreset::RandomK, 2000, 4};
  const auto corpus = lf::buildCorpus(tables, plan, 16);
  EXPECT_EQ(corpus.designs.size(), 2000u);
  std::set<std::tuple<int, int, int, int>> pairs;
  for (const auto& z : corpus.designs)
    pairs.insert({static_cast<int>(z.provenance.left.archetype), z.provenance.left.row,
                  static_cast<int>(z.provenance.right.archetype), z.provenance.right.row});
  EXPECT_EQ(pairs.size(), 2000u);
}

TEST(Corpus, TooManyPairsRejected) {
  const auto tables = lf::sampleAllDesignTables(2, 1);
  lf::MixingPlan plan{lf::MixingPreset::RandomK, 1000, 1};
  EXPECT_THROW(lf::buildCorpus(tables, plan, 16), lf::DomainError);
}

TEST(Corpus, PresetNames) {
  for (auto p : {lf::MixingPreset::SelfPairs, lf::MixingPreset::AllPairs, lf::MixingPreset::RandomK})
    EXPECT_EQ(lf::parsePreset(lf::presetName(p)), p);
  EXPECT_THROW(lf::parsePreset("everything"), lf::FormatError);
}

TEST(Corpus, WriteReadIsByteStable) {
  const auto tables = lf::sampleAllDesignTables(25, 3);
  lf::MixingPlan plan{lf::MixingPreset::RandomK, 64, 9};
  const auto corpus = lf::buildCorpus(tables, plan, 16);
  const fs::path a = fs::temp_directory_path() / "lf_corpus_a", b = fs::temp_directory_path() / "lf_corpus_b";
  fs::remove_all(a);
  fs::remove_all(b);
  lf::writeCorpus(a, corpus);
  lf::writeCorpus(b, lf::buildCorpus(tables, plan, 16));
  for (const char* f : {"manifest.txt", "rasters.lfrd", "provenance.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const auto back = lf::readCorpus(a);
  ASSERT_EQ(back.designs.size(), corpus.designs.size());
  for (std::size_t i = 0; i < corpus.designs.size(); ++i) EXPECT_EQ(back.designs[i], corpus.designs[i]);
  EXPECT_EQ(lf::formatManifest(back.manifest), lf::formatManifest(corpus.manifest));
  fs::remove_all(a);
  fs::remove_all(b);
}
