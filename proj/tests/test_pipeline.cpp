#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "latentflow/pipeline.hpp"

namespace lf = latentflow;
namespace fs = std::filesystem;

namespace {

const char* kTiny = R"(
[corpus]
resolution = 16
table_seed = 1
mixing = random-k
mix_k = 96
mix_seed = 1
[gan]
latent_dim = 3
epochs = 60
seed = 1
probe_count = 8
[viz]
perplexity = 10
iterations = 200
seed = 1
[mobo]
initial = 10
batches = 1
batch_size = 3
mc_samples = 32
restarts = 4
gp_restarts = 2
seed = 1
[interpret]
candidates = 64
draws = 32
bins = 8
seed = 1
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Pipeline : public ::testing::Test {
protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("lf_pipeline_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    opts.outDir = dir;
  }
  void TearDown() override { fs::remove_all(dir); }
  lf::PipelineConfig cfg = lf::PipelineConfig::parse(kTiny);
  lf::CommandOptions opts;
  fs::path dir;
};

}  // namespace

TEST_F(Pipeline, OptimizeWithoutModelNamesTrain) {
  try {
    lf::cmdOptimize(cfg, opts);
    FAIL() << "expected an upstream error";
  } catch (const lf::UpstreamMissing& e) {
    EXPECT_NE(std::string(e.what()).find("latentflow train"), std::string::npos);
    EXPECT_EQ(lf::exitCodeFor(e), 3);
  }
}

TEST_F(Pipeline, EndToEndAndDeterministic) {
  lf::cmdSynth(cfg, opts);
  lf::cmdTrain(cfg, opts);
  lf::cmdViz(cfg, opts);
  lf::cmdDoe(cfg, opts);
  lf::cmdOptimize(cfg, opts);
  lf::cmdInterpret(cfg, opts);
  lf::cmdPlot(cfg, opts);
  const std::vector<fs::path> csvs = {"corpus/provenance.csv", "model/history.csv", "viz/embedding.csv",
                                      "doe/doe.csv", "optimize/history.csv", "optimize/pareto.csv",
                                      "interpret/probabilities.csv", "interpret/histograms.csv"};
  std::vector<std::string> first;
  for (const auto& p : csvs) {
    ASSERT_TRUE(fs::exists(dir / p)) << p;
    first.push_back(slurp(dir / p));
  }
  EXPECT_EQ(lf::readArtifactHash(dir / "optimize/history.csv"), cfg.stageHash(lf::Stage::Optimize));
  EXPECT_EQ(lf::readArtifactHash(dir / "viz/tsne.svg"), cfg.stageHash(lf::Stage::Viz));

  lf::cmdSynth(cfg, opts);
  lf::cmdTrain(cfg, opts);
  lf::cmdViz(cfg, opts);
  lf::cmdDoe(cfg, opts);
  lf::cmdOptimize(cfg, opts);
  lf::cmdInterpret(cfg, opts);
  for (std::size_t i = 0; i < csvs.size(); ++i) EXPECT_EQ(slurp(dir / csvs[i]), first[i]) << csvs[i];
}

TEST_F(Pipeline, StaleUpstreamRejectedUnlessForced) {
  lf::cmdSynth(cfg, opts);
  auto changed = cfg;
  changed.corpus.plan.k = 80;
  EXPECT_THROW(lf::cmdTrain(changed, opts), lf::UpstreamMissing);
  auto forced = opts;
  forced.force = true;
  EXPECT_NO_THROW(lf::cmdTrain(changed, forced));
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(lf::exitCodeFor(lf::ConfigError("x")), 2);
  EXPECT_EQ(lf::exitCodeFor(lf::DomainError("x")), 2);
  EXPECT_EQ(lf::exitCodeFor(lf::UpstreamMissing("x")), 3);
  EXPECT_EQ(lf::exitCodeFor(lf::NumericFailure("x")), 4);
  EXPECT_EQ(lf::exitCodeFor(lf::IoError("x")), 1);
}
