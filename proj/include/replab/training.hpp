#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "replab/attacks.hpp"
#include "replab/data.hpp"
#include "replab/model.hpp"

namespace replab {

/// Triangular wave from base up to max and back over cycle_epochs.
struct CyclicalLr {
  double base = 0.001;
  double max = 0.02;
  int cycle_epochs = 10;
};

struct ConstantLr {
  double lr = 0.01;
};

/// Piecewise-constant decay: lr * factor^(number of decay epochs passed).
struct MultiStepLr {
  double lr = 0.1;
  std::vector<int> decay_epochs{50, 100};
  double factor = 0.1;
};

using LrSchedule = std::variant<CyclicalLr, ConstantLr, MultiStepLr>;

/// Learning rate at a global step (0-based) for the given schedule.
double lr_at(long long step, const LrSchedule& schedule, int steps_per_epoch);

/// Fit outputs to the assigned class prototypes.
struct RepulsiveRegime {
  PrototypeSet protos;
  LossMode mode = LossMode::SquaredDistance;
};

/// Plain softmax cross-entropy baseline.
struct SoftmaxRegime {};

/// Mixture of natural and adversarial-example loss; one adversarial example
/// per sample per step against the current model. alpha = 0 trains purely on
/// perturbed data.
struct AdvTrainRegime {
  double alpha = 0.0;
  AttackConfig attack;
  std::variant<SoftmaxRegime, RepulsiveRegime> base;
};

using Regime = std::variant<RepulsiveRegime, SoftmaxRegime, AdvTrainRegime>;

struct EarlyStopConfig {
  bool enabled = false;
  int eval_every_epochs = 5;
  AttackConfig attack;   // cheap selection attack, low iteration count
  int patience = 3;      // evaluations without improvement before halting
  int subset_size = 200; // fixed seeded validation subset
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 64;
  LrSchedule lr_schedule = ConstantLr{0.01};
  double momentum = 0.9;
  Regime regime = SoftmaxRegime{};
  EarlyStopConfig early_stop;
  bool augment = false;  // image-like training data only
  uint64_t seed = 1;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double natural_val_acc = 0.0;
  std::optional<double> robust_val_acc;
  double lr = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> records;
  int best_epoch = 0;            // epoch of the returned checkpoint
  double best_robust_acc = 0.0;  // its robust validation accuracy (when evaluated)
};

std::string history_to_csv(const TrainHistory& history);

struct TrainResult {
  Mlp model;
  TrainHistory history;
};

/// Thrown when the loss or the parameters stop being finite; carries the
/// history of every epoch completed before the failure.
class TrainDivergenceError : public std::runtime_error {
 public:
  TrainDivergenceError(const std::string& what, TrainHistory history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const TrainHistory& history() const { return history_; }

 private:
  TrainHistory history_;
};

/// Seeded SGD with momentum over shuffled minibatches. With early stopping
/// enabled, returns the checkpoint with the best robust validation accuracy
/// (ties keep the earlier epoch). Deterministic for a fixed seed.
TrainResult train(Mlp model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg);

/// Robust accuracy of the model on a fixed seeded subset of `val` under a
/// cheap attack; the early-stopping selection metric.
double evaluate_robust_checkpoint(const Classifier& clf, const Dataset& val,
                                  const AttackConfig& cheap, int subset_size, uint64_t seed);

/// Classifier for a model under the given training regime.
Classifier regime_classifier(const Mlp& model, const Regime& regime);

}  // namespace replab
