#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "replab/geometry.hpp"
#include "replab/model.hpp"

namespace replab {

enum class AttackInit { AtInput, UniformInBall };

/// The quantity PGD ascends. TrainingLoss is the target's own training loss;
/// PrototypeMargin is the classifier-aware d(f(x), p_label) - min_other
/// margin (positive exactly when misclassified); SoftmaxXent is plain
/// cross-entropy on the outputs.
enum class Surrogate { TrainingLoss, PrototypeMargin, SoftmaxXent };

std::string surrogate_name(Surrogate s);
Surrogate surrogate_from_name(const std::string& name);
std::string attack_init_name(AttackInit init);
AttackInit attack_init_from_name(const std::string& name);

struct AttackConfig {
  Metric metric = Metric::Linf;
  double eps = 0.0;       // perturbation budget, input units
  double step_size = 0.0; // <= 0 selects the default 2.5 * eps / n_iters
  int n_iters = 20;
  int restarts = 1;
  AttackInit init = AttackInit::UniformInBall;
  Surrogate surrogate = Surrogate::TrainingLoss;
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  uint64_t seed = 0;

  void validate() const;
  double effective_step() const;
};

struct AdvResult {
  Vec x_adv;
  double achieved_loss = 0.0;
  bool success = false;        // misclassified under the target's rule
  int restarts_used = 0;
  bool flat_gradient = false;  // every observed gradient was exactly zero
  int aborted_restarts = 0;    // restarts dropped on non-finite loss
};

/// Surrogate value at (x, label). Throws on surrogate/model mismatch.
double surrogate_loss(const Classifier& target, const Vec& x, int label, Surrogate s);

struct SurrogateEval {
  double value = 0.0;
  Vec input_grad;
};
SurrogateEval surrogate_eval(const Classifier& target, const Vec& x, int label, Surrogate s);

/// Multi-restart projected gradient ascent on the surrogate inside the
/// eps-ball around x, clamped to the domain after every step. Returns the
/// best restart: any successful misclassification first, then highest
/// achieved loss; first such restart on ties. Per-restart randomness derives
/// from (cfg.seed, sample_index, restart index). When warm_start is given,
/// restart 0 begins there (projected) instead of at cfg.init.
AdvResult pgd(const Classifier& target, const Vec& x, int label, const AttackConfig& cfg,
              uint64_t sample_index = 0, const Vec* warm_start = nullptr);

/// Single-step attack: identical to pgd with n_iters = 1, AtInput init,
/// step_size = eps, one restart. The classic sign step applies under Linf;
/// under L2 the step follows the normalized gradient instead.
AdvResult fgsm(const Classifier& target, const Vec& x, int label, const AttackConfig& cfg,
               uint64_t sample_index = 0);

/// Adversarial batch export for the transfer harness:
/// sample id, label, prediction on x_adv, then the x_adv coordinates.
std::string adv_batch_to_csv(const std::vector<int>& labels, const std::vector<int>& predictions,
                             const std::vector<Vec>& x_adv);
void save_adv_batch(const std::vector<int>& labels, const std::vector<int>& predictions,
                    const std::vector<Vec>& x_adv, const std::filesystem::path& path);

}  // namespace replab
