// Command-line front end for the adversarial-robustness laboratory:
// prototype generation, training, attacks, curve sweeps, analyses and
// report emission, driven by config files for reproducible experiments.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "replab/commands.hpp"
#include "replab/config.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  std::string seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* app, CommonOpts& opts) {
  app->add_option("--config", opts.config_path, "experiment config file")
      ->check(CLI::ExistingFile);
  app->add_option("--out", opts.out_dir, "output directory");
  app->add_option("--seed", opts.seed, "override experiment.seed");
  app->add_option("--override", opts.overrides,
                  "override a config value as section.key=value (repeatable)");
}

replab::ExperimentConfig resolve_config(const CommonOpts& opts) {
  replab::ExperimentConfig cfg = opts.config_path.empty()
                                     ? replab::ExperimentConfig()
                                     : replab::ExperimentConfig::from_file(opts.config_path);
  for (const std::string& ov : opts.overrides) cfg.apply_override(ov);
  if (!opts.seed.empty()) cfg.set("experiment", "seed", opts.seed);
  return cfg;
}

int run(const CommonOpts& opts,
        replab::cmd::CommandResult (*command)(const replab::ExperimentConfig&,
                                              const std::filesystem::path&)) {
  try {
    const replab::ExperimentConfig cfg = resolve_config(opts);
    const replab::cmd::CommandResult res = command(cfg, opts.out_dir);
    std::cout << res.summary << "\n";
    for (const auto& path : res.written) std::cout << "wrote " << path.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replab: repulsive-prototype robustness laboratory"};
  app.require_subcommand(1);

  CommonOpts opts;

  CLI::App* protos = app.add_subcommand("protos", "build or inspect prototype sets");
  protos->require_subcommand(1);
  CLI::App* protos_gen = protos->add_subcommand("gen", "optimize a prototype set");
  CLI::App* protos_stats = protos->add_subcommand("stats", "separation stats of a saved set");
  CLI::App* train = app.add_subcommand("train", "train a model");
  CLI::App* attack = app.add_subcommand("attack", "white-box attack on a saved model");
  CLI::App* curve = app.add_subcommand("curve", "robustness curve over an eps sweep");
  CLI::App* confusion = app.add_subcommand("confusion", "natural and adversarial confusion");
  CLI::App* transfer = app.add_subcommand("transfer", "black-box transferability harness");
  CLI::App* sweep = app.add_subcommand("sweep-dims", "output-dimension sweep table");

  for (CLI::App* sub :
       {protos_gen, protos_stats, train, attack, curve, confusion, transfer, sweep}) {
    add_common(sub, opts);
  }

  CLI11_PARSE(app, argc, argv);

  if (protos_gen->parsed()) return run(opts, replab::cmd::protos_gen);
  if (protos_stats->parsed()) return run(opts, replab::cmd::protos_stats);
  if (train->parsed()) return run(opts, replab::cmd::train_model);
  if (attack->parsed()) return run(opts, replab::cmd::attack_model);
  if (curve->parsed()) return run(opts, replab::cmd::curve);
  if (confusion->parsed()) return run(opts, replab::cmd::confusion);
  if (transfer->parsed()) return run(opts, replab::cmd::transfer);
  if (sweep->parsed()) return run(opts, replab::cmd::sweep_dims);
  return 1;
}
