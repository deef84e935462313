#include "replab/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "replab/evaluation.hpp"
#include "replab/io.hpp"
#include "replab/rng.hpp"

namespace replab {

double lr_at(long long step, const LrSchedule& schedule, int steps_per_epoch) {
  if (step < 0) throw std::invalid_argument("lr_at: step must be >= 0");
  if (steps_per_epoch < 1) throw std::invalid_argument("lr_at: steps_per_epoch must be >= 1");
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantLr>) {
          return s.lr;
        } else if constexpr (std::is_same_v<T, CyclicalLr>) {
          const long long period =
              static_cast<long long>(s.cycle_epochs) * steps_per_epoch;
          if (period <= 0) return s.base;
          const double pos =
              static_cast<double>(step % period) / static_cast<double>(period);
          const double tri = 1.0 - std::abs(2.0 * pos - 1.0);  // 0 -> 1 -> 0
          return s.base + (s.max - s.base) * tri;
        } else {
          const long long epoch = step / steps_per_epoch;
          double lr = s.lr;
          for (const int de : s.decay_epochs) {
            if (epoch >= de) lr *= s.factor;
          }
          return lr;
        }
      },
      schedule);
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw std::invalid_argument("TrainConfig: momentum must be in [0,1)");
  }
  if (const auto* c = std::get_if<CyclicalLr>(&lr_schedule)) {
    if (c->base > c->max) throw std::invalid_argument("TrainConfig: cyclical base > max");
    if (c->cycle_epochs < 1) throw std::invalid_argument("TrainConfig: cycle_epochs >= 1");
  }
  if (const auto* at = std::get_if<AdvTrainRegime>(&regime)) {
    if (at->alpha < 0.0 || at->alpha > 1.0) {
      throw std::invalid_argument("TrainConfig: alpha must be in [0,1]");
    }
  }
}

Classifier regime_classifier(const Mlp& model, const Regime& regime) {
  if (const auto* rep = std::get_if<RepulsiveRegime>(&regime)) {
    return make_prototype_classifier(model, rep->protos, rep->mode);
  }
  if (const auto* at = std::get_if<AdvTrainRegime>(&regime)) {
    if (const auto* rep = std::get_if<RepulsiveRegime>(&at->base)) {
      return make_prototype_classifier(model, rep->protos, rep->mode);
    }
    return make_softmax_classifier(model);
  }
  return make_softmax_classifier(model);
}

namespace {

LossSpec regime_loss(const Regime& regime) {
  if (const auto* rep = std::get_if<RepulsiveRegime>(&regime)) {
    return LossSpec{rep->mode, &rep->protos};
  }
  if (const auto* at = std::get_if<AdvTrainRegime>(&regime)) {
    if (const auto* rep = std::get_if<RepulsiveRegime>(&at->base)) {
      return LossSpec{rep->mode, &rep->protos};
    }
  }
  return LossSpec{LossMode::SoftmaxCrossEntropy, nullptr};
}

struct Momentum {
  std::vector<Layer> v;

  explicit Momentum(const Mlp& m) {
    for (const Layer& l : m.layers) {
      Layer z;
      z.in = l.in;
      z.out = l.out;
      z.w.assign(l.w.size(), 0.0);
      z.b.assign(l.b.size(), 0.0);
      v.push_back(std::move(z));
    }
  }

  void step(Mlp& model, const std::vector<Layer>& grads, double beta, double lr) {
    for (size_t li = 0; li < model.layers.size(); ++li) {
      Layer& l = model.layers[li];
      Layer& vl = v[li];
      const Layer& g = grads[li];
      for (size_t i = 0; i < l.w.size(); ++i) {
        vl.w[i] = beta * vl.w[i] + g.w[i];
        l.w[i] -= lr * vl.w[i];
      }
      for (size_t i = 0; i < l.b.size(); ++i) {
        vl.b[i] = beta * vl.b[i] + g.b[i];
        l.b[i] -= lr * vl.b[i];
      }
    }
  }
};

void check_finite(const Mlp& model, int epoch) {
  for (const Layer& l : model.layers) {
    for (const double w : l.w) {
      if (!std::isfinite(w)) {
        throw std::runtime_error("train: parameters diverged at epoch " + std::to_string(epoch));
      }
    }
  }
}

}  // namespace

double evaluate_robust_checkpoint(const Classifier& clf, const Dataset& val,
                                  const AttackConfig& cheap, int subset_size, uint64_t seed) {
  Dataset subset;
  subset.k = val.k;
  subset.shape = val.shape;
  if (subset_size <= 0 || static_cast<size_t>(subset_size) >= val.size()) {
    subset = val;
  } else {
    std::vector<size_t> idx(val.size());
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(derive_seed(seed, "earlystop-subset"));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(subset_size);
    std::sort(idx.begin(), idx.end());  // deterministic evaluation order
    for (const size_t i : idx) {
      subset.inputs.push_back(val.inputs[i]);
      subset.labels.push_back(val.labels[i]);
    }
  }
  return robust_accuracy(clf, subset, cheap).robust_acc;
}

TrainResult train(Mlp model, const Dataset& train_set, const Dataset& val_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  train_set.validate();
  val_set.validate();
  const LossSpec loss = regime_loss(cfg.regime);
  if (loss.protos) {
    if (model.output_dim() != loss.protos->dim) {
      throw std::invalid_argument("train: model output dim does not match prototype dim");
    }
    if (train_set.k > loss.protos->k) {
      throw std::invalid_argument("train: more classes than prototypes");
    }
  } else if (train_set.k > model.output_dim()) {
    throw std::invalid_argument("train: more classes than output logits");
  }

  const auto* adv = std::get_if<AdvTrainRegime>(&cfg.regime);
  const size_t n = train_set.size();
  const int steps_per_epoch =
      static_cast<int>((n + cfg.batch_size - 1) / static_cast<size_t>(cfg.batch_size));

  TrainResult result;
  result.history.best_epoch = 0;
  TrainHistory& history = result.history;

  Momentum momentum(model);
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Mlp best_model = model;
  double best_robust = -1.0;
  int evals_since_best = 0;

  auto augment_rng = make_rng(derive_seed(cfg.seed, "augment"));

  long long global_step = 0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto shuffle_rng = make_rng(derive_seed(cfg.seed, "shuffle", static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    const double epoch_lr = lr_at(global_step, cfg.lr_schedule, steps_per_epoch);
    double loss_sum = 0.0;
    size_t loss_count = 0;

    const auto run_epoch = [&] {
      for (size_t start = 0; start < n; start += cfg.batch_size) {
        const size_t stop = std::min(n, start + cfg.batch_size);
        std::vector<Sample> batch;
        batch.reserve(stop - start);
        for (size_t bi = start; bi < stop; ++bi) {
          const size_t si = order[bi];
          Vec x = train_set.inputs[si];
          if (cfg.augment && train_set.shape) {
            x = augment(x, train_set.shape, augment_rng).x;
          }
          batch.push_back(Sample{std::move(x), train_set.labels[si]});
        }

        const double lr = lr_at(global_step, cfg.lr_schedule, steps_per_epoch);
        GradientBundle natural;
        double batch_loss = 0.0;

        if (!adv) {
          natural = backward(model, batch, loss);
          batch_loss = natural.loss_value;
          momentum.step(model, natural.param_grads, cfg.momentum, lr);
        } else {
          // One adversarial example per sample against the frozen current model.
          const Classifier clf = regime_classifier(model, cfg.regime);
          std::vector<Sample> adv_batch;
          if (adv->alpha < 1.0) {
            adv_batch.reserve(batch.size());
            for (size_t bi = 0; bi < batch.size(); ++bi) {
              AttackConfig acfg = adv->attack;
              acfg.seed = derive_seed(cfg.seed, "advtrain", static_cast<uint64_t>(global_step));
              const AdvResult res = pgd(clf, batch[bi].x, batch[bi].label, acfg, bi);
              adv_batch.push_back(Sample{res.x_adv, batch[bi].label});
            }
          }
          std::vector<Layer> grads;
          for (const Layer& l : model.layers) {
            Layer z;
            z.in = l.in;
            z.out = l.out;
            z.w.assign(l.w.size(), 0.0);
            z.b.assign(l.b.size(), 0.0);
            grads.push_back(std::move(z));
          }
          if (adv->alpha > 0.0) {
            natural = backward(model, batch, loss);
            batch_loss += adv->alpha * natural.loss_value;
            for (size_t li = 0; li < grads.size(); ++li) {
              for (size_t i = 0; i < grads[li].w.size(); ++i) {
                grads[li].w[i] += adv->alpha * natural.param_grads[li].w[i];
              }
              for (size_t i = 0; i < grads[li].b.size(); ++i) {
                grads[li].b[i] += adv->alpha * natural.param_grads[li].b[i];
              }
            }
          }
          if (adv->alpha < 1.0) {
            const GradientBundle pert = backward(model, adv_batch, loss);
            batch_loss += (1.0 - adv->alpha) * pert.loss_value;
            for (size_t li = 0; li < grads.size(); ++li) {
              for (size_t i = 0; i < grads[li].w.size(); ++i) {
                grads[li].w[i] += (1.0 - adv->alpha) * pert.param_grads[li].w[i];
              }
              for (size_t i = 0; i < grads[li].b.size(); ++i) {
                grads[li].b[i] += (1.0 - adv->alpha) * pert.param_grads[li].b[i];
              }
            }
          }
          momentum.step(model, grads, cfg.momentum, lr);
        }

        if (!std::isfinite(batch_loss)) {
          throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
        }
        loss_sum += batch_loss * static_cast<double>(batch.size());
        loss_count += batch.size();
        ++global_step;
      }
      check_finite(model, epoch);
    };
    try {
      run_epoch();
    } catch (const std::runtime_error& e) {
      // divergence: hand back everything recorded before the failing epoch
      throw TrainDivergenceError(e.what(), history);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(loss_count);
    rec.lr = epoch_lr;
    {
      const Classifier clf = regime_classifier(model, cfg.regime);
      rec.natural_val_acc = accuracy(clf, val_set);
      if (cfg.early_stop.enabled &&
          (epoch % cfg.early_stop.eval_every_epochs == 0 || epoch == cfg.epochs)) {
        const double rob = evaluate_robust_checkpoint(
            clf, val_set, cfg.early_stop.attack, cfg.early_stop.subset_size, cfg.seed);
        rec.robust_val_acc = rob;
        if (rob > best_robust) {
          best_robust = rob;
          best_model = model;
          history.best_epoch = epoch;
          evals_since_best = 0;
        } else {
          ++evals_since_best;
        }
      }
    }
    history.records.push_back(rec);

    if (cfg.early_stop.enabled && evals_since_best >= cfg.early_stop.patience) break;
  }

  if (cfg.early_stop.enabled && best_robust >= 0.0) {
    result.model = std::move(best_model);
    history.best_robust_acc = best_robust;
  } else {
    result.model = std::move(model);
    history.best_epoch = static_cast<int>(history.records.size());
    history.best_robust_acc = 0.0;
  }
  return result;
}

std::string history_to_csv(const TrainHistory& history) {
  std::ostringstream out;
  out << "epoch,loss,nat_acc,rob_acc,lr\n";
  for (const EpochRecord& r : history.records) {
    out << r.epoch << "," << format_double(r.train_loss) << ","
        << format_double(r.natural_val_acc) << ",";
    if (r.robust_val_acc) out << format_double(*r.robust_val_acc);
    out << "," << format_double(r.lr) << "\n";
  }
  return out.str();
}

}  // namespace replab
