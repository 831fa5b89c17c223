#include <gtest/gtest.h>

#include <string>

#include "latentflow/config.hpp"

namespace lf = latentflow;

namespace {

const char* kMinimal = R"(
# seeds only; everything else defaulted
[corpus]
table_seed = 1
mix_seed = 2
[gan]
seed = 3
[viz]
seed = 4
[mobo]
seed = 5
[interpret]
seed = 6
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

}  // namespace

TEST(Config, MinimalUsesDefaults) {
  const auto cfg = lf::PipelineConfig::parse(kMinimal);
  EXPECT_EQ(cfg.gan.latentDim, 8);
  EXPECT_EQ(cfg.mobo.initial, 20);
  EXPECT_EQ(cfg.mobo.batches, 3);
  EXPECT_EQ(cfg.mobo.batchSize, 5);
  EXPECT_EQ(cfg.corpus.rowsPerArchetype, 25);
  EXPECT_EQ(cfg.mobo.seed, 5u);
}

TEST(Config, RoundTrip) {
  auto cfg = lf::PipelineConfig::parse(kMinimal);
  cfg.gan.learningRate = 1.0 / 3.0;
  cfg.mobo.radius = 1.75;
  cfg.outDir = "somewhere/else";
  EXPECT_EQ(lf::PipelineConfig::parse(cfg.serialize()), cfg);
}

TEST(Config, UnknownKeyRejected) {
  EXPECT_THROW(lf::PipelineConfig::parse(replace(kMinimal, "seed = 3", "seed = 3\nepochz = 4")), lf::ConfigError);
  EXPECT_THROW(lf::PipelineConfig::parse(std::string(kMinimal) + "[extra]\nx = 1\n"), lf::ConfigError);
}

TEST(Config, MissingSeedRejected) {
  EXPECT_THROW(lf::PipelineConfig::parse(replace(kMinimal, "seed = 4", "")), lf::ConfigError);
}

TEST(Config, BadValuesRejected) {
  EXPECT_THROW(lf::PipelineConfig::parse(std::string(kMinimal) + "[paths]\nout = x\n[gan]\nepochs = -1\n"),
               lf::ConfigError);
  EXPECT_THROW(lf::PipelineConfig::parse(replace(kMinimal, "seed = 5", "seed = 5\nradius = abc")), lf::ConfigError);
  EXPECT_THROW(lf::PipelineConfig::parse(replace(kMinimal, "mix_seed = 2", "mix_seed = 2\nmixing = everything")),
               lf::ConfigError);
}

TEST(Config, StageHashesTrackUpstreamOnly) {
  const auto base = lf::PipelineConfig::parse(kMinimal);
  auto viz = base;
  viz.viz.perplexity = 12;
  EXPECT_EQ(viz.stageHash(lf::Stage::Train), base.stageHash(lf::Stage::Train));
  EXPECT_NE(viz.stageHash(lf::Stage::Viz), base.stageHash(lf::Stage::Viz));
  auto gan = base;
  gan.gan.epochs = 7;
  EXPECT_EQ(gan.stageHash(lf::Stage::Synth), base.stageHash(lf::Stage::Synth));
  EXPECT_NE(gan.stageHash(lf::Stage::Optimize), base.stageHash(lf::Stage::Optimize));
  auto paths = base;
  paths.outDir = "other";
  for (auto s : {lf::Stage::Synth, lf::Stage::Train, lf::Stage::Viz, lf::Stage::Doe, lf::Stage::Optimize,
                 lf::Stage::Interpret})
    EXPECT_EQ(paths.stageHash(s), base.stageHash(s));
}

TEST(Config, SeedOverrideTouchesEverySeed) {
  auto cfg = lf::PipelineConfig::parse(kMinimal);
  cfg.overrideSeeds(42);
  EXPECT_EQ(cfg.corpus.tableSeed, 42u);
  EXPECT_EQ(cfg.corpus.plan.seed, 42u);
  EXPECT_EQ(cfg.gan.seed, 42u);
  EXPECT_EQ(cfg.viz.seed, 42u);
  EXPECT_EQ(cfg.mobo.seed, 42u);
  EXPECT_EQ(cfg.interpret.seed, 42u);
}

TEST(Config, Fnv1aKnownVector) {
  EXPECT_EQ(lf::fnv1aHex(""), "cbf29ce484222325");
  EXPECT_EQ(lf::fnv1aHex("a"), "af63dc4c8601ec8c");
}
