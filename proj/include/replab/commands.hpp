#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "replab/config.hpp"
#include "replab/data.hpp"
#include "replab/model.hpp"
#include "replab/training.hpp"

namespace replab::cmd {

struct CommandResult {
  std::vector<std::filesystem::path> written;
  std::string summary;
};

/// Subcommand bodies: validate + compute first, then write every output
/// atomically, so a failing run leaves no partial files behind.
CommandResult protos_gen(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandResult protos_stats(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandResult train_model(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandResult attack_model(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandResult curve(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandResult confusion(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandResult transfer(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
CommandResult sweep_dims(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Shared builders, exposed for tests.

/// Deterministic train/test pair for the [data] section (generated or loaded,
/// then stratified-split).
std::pair<Dataset, Dataset> build_datasets(const ExperimentConfig& cfg);

/// Prototype set for the run: prototypes.file when set, else freshly
/// optimized from the [prototypes] section with a seed derived from the
/// experiment seed (and `index` for sweeps).
PrototypeSet build_prototypes(const ExperimentConfig& cfg, int k, uint64_t index = 0);

AttackConfig build_attack(const ExperimentConfig& cfg);

/// A model loaded from disk together with everything its inference rule
/// needs. `protos_override` replaces the model's recorded prototype
/// reference.
struct LoadedModel {
  Mlp model;
  std::optional<PrototypeSet> protos;
  Rule rule = Rule::Softmax;
  LossMode loss_mode = LossMode::SoftmaxCrossEntropy;

  Classifier classifier() const;
};

LoadedModel load_classifier(const std::filesystem::path& model_path,
                            const std::optional<std::filesystem::path>& protos_override);

}  // namespace replab::cmd
