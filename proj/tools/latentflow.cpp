// Command-line driver for the latent-space flow-design pipeline.

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "latentflow/pipeline.hpp"

namespace {

using Command = std::function<void(const latentflow::PipelineConfig&, const latentflow::CommandOptions&)>;

const std::map<std::string, std::pair<std::string, Command>>& commands() {
  static const std::map<std::string, std::pair<std::string, Command>> table = {
      {"synth", {"generate the parametric design corpus", latentflow::cmdSynth}},
      {"train", {"train the InfoGAN on the corpus", latentflow::cmdTrain}},
      {"viz", {"t-SNE embedding of encoded corpus latents", latentflow::cmdViz}},
      {"doe", {"initial space-filling designs in the latent ball", latentflow::cmdDoe}},
      {"optimize", {"batch EHVI Bayesian optimization", latentflow::cmdOptimize}},
      {"interpret", {"Pareto probability and latent marginals", latentflow::cmdInterpret}},
      {"plot", {"re-render figures from existing CSV artifacts", latentflow::cmdPlot}},
  };
  return table;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"latentflow: generative latent-space design optimization for 2-D flow distributors"};
  app.require_subcommand(1);

  std::string configPath;
  std::string outDir;
  bool force = false;
  std::optional<std::uint64_t> seedOverride;
  app.add_option("-c,--config", configPath, "INI configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", outDir, "artifact directory (overrides [paths] out)");
  app.add_flag("-f,--force", force, "accept upstream artifacts produced under a different config");
  app.add_option("--seed-override", seedOverride, "derive every stage seed from this single seed");

  std::map<CLI::App*, Command> dispatch;
  for (const auto& [name, entry] : commands()) dispatch[app.add_subcommand(name, entry.first)] = entry.second;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    auto cfg = latentflow::PipelineConfig::load(configPath);
    if (seedOverride) cfg.overrideSeeds(*seedOverride);
    latentflow::CommandOptions opts{outDir, force, &std::cerr};
    for (const auto& [sub, fn] : dispatch)
      if (sub->parsed()) fn(cfg, opts);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return latentflow::exitCodeFor(e);
  }
}
