#include "replab/attacks.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "replab/io.hpp"
#include "replab/rng.hpp"

namespace replab {

std::string surrogate_name(Surrogate s) {
  switch (s) {
    case Surrogate::TrainingLoss: return "training_loss";
    case Surrogate::PrototypeMargin: return "prototype_margin";
    case Surrogate::SoftmaxXent: return "softmax_xent";
  }
  return "?";
}

Surrogate surrogate_from_name(const std::string& name) {
  if (name == "training_loss") return Surrogate::TrainingLoss;
  if (name == "prototype_margin") return Surrogate::PrototypeMargin;
  if (name == "softmax_xent") return Surrogate::SoftmaxXent;
  throw std::invalid_argument("unknown surrogate: " + name);
}

std::string attack_init_name(AttackInit init) {
  return init == AttackInit::AtInput ? "at_input" : "uniform";
}

AttackInit attack_init_from_name(const std::string& name) {
  if (name == "at_input") return AttackInit::AtInput;
  if (name == "uniform") return AttackInit::UniformInBall;
  throw std::invalid_argument("unknown attack init: " + name);
}

void AttackConfig::validate() const {
  if (eps < 0.0) throw std::invalid_argument("AttackConfig: eps must be >= 0");
  if (n_iters < 1) throw std::invalid_argument("AttackConfig: n_iters must be >= 1");
  if (restarts < 1) throw std::invalid_argument("AttackConfig: restarts must be >= 1");
  if (domain_lo > domain_hi) throw std::invalid_argument("AttackConfig: domain lo > hi");
}

double AttackConfig::effective_step() const {
  if (step_size > 0.0) return step_size;
  return 2.5 * eps / static_cast<double>(n_iters);
}

namespace {

void check_surrogate(const Classifier& target, Surrogate s) {
  if (s == Surrogate::PrototypeMargin && !target.protos) {
    throw std::invalid_argument("surrogate: PrototypeMargin needs a PrototypeSet");
  }
  if (s == Surrogate::SoftmaxXent &&
      target.model->output_dim() != target.num_classes()) {
    throw std::invalid_argument(
        "surrogate: SoftmaxXent needs the output dimension to equal the class count");
  }
  if (s == Surrogate::TrainingLoss &&
      target.training_loss.mode != LossMode::SoftmaxCrossEntropy &&
      !target.training_loss.protos) {
    throw std::invalid_argument("surrogate: target's training loss lacks prototypes");
  }
}

/// Value and input gradient of the margin d(f(x), p_label) - min_{j != label}
/// d(f(x), p_j). Ties in the runner-up argmin resolve to the lowest class id.
SurrogateEval margin_eval(const Classifier& target, const Vec& x, int label) {
  const PrototypeSet& ps = *target.protos;
  if (label < 0 || label >= ps.k) throw std::invalid_argument("margin: label out of range");
  const ForwardCache cache = forward_cache(*target.model, x);
  const Vec& out = cache.output();

  int runner = -1;
  double runner_d = 0.0;
  for (int j = 0; j < ps.k; ++j) {
    if (j == label) continue;
    const double d = distance(out, ps.centers[j], ps.metric);
    if (runner < 0 || d < runner_d) {
      runner = j;
      runner_d = d;
    }
  }
  const double own_d = distance(out, ps.centers[label], ps.metric);

  Vec d_out(out.size(), 0.0);
  const DistanceGradient g_own = distance_gradient(out, ps.centers[label], ps.metric);
  const DistanceGradient g_run = distance_gradient(out, ps.centers[runner], ps.metric);
  for (size_t i = 0; i < out.size(); ++i) d_out[i] = g_own.grad[i] - g_run.grad[i];

  SurrogateEval ev;
  ev.value = own_d - runner_d;
  ev.input_grad = input_gradient(*target.model, cache, d_out);
  return ev;
}

SurrogateEval loss_spec_eval(const Classifier& target, const Vec& x, int label,
                             const LossSpec& spec) {
  const ForwardCache cache = forward_cache(*target.model, x);
  const LossGrad lg = loss_with_output_grad(cache.output(), label, spec);
  SurrogateEval ev;
  ev.value = lg.value;
  ev.input_grad = input_gradient(*target.model, cache, lg.d_output);
  return ev;
}

}  // namespace

SurrogateEval surrogate_eval(const Classifier& target, const Vec& x, int label, Surrogate s) {
  check_surrogate(target, s);
  switch (s) {
    case Surrogate::TrainingLoss: return loss_spec_eval(target, x, label, target.training_loss);
    case Surrogate::PrototypeMargin: return margin_eval(target, x, label);
    case Surrogate::SoftmaxXent:
      return loss_spec_eval(target, x, label, LossSpec{LossMode::SoftmaxCrossEntropy, nullptr});
  }
  throw std::logic_error("surrogate_eval: unhandled surrogate");
}

double surrogate_loss(const Classifier& target, const Vec& x, int label, Surrogate s) {
  return surrogate_eval(target, x, label, s).value;
}

namespace {

Vec sample_in_ball(const Vec& center, double eps, Metric m, std::mt19937_64& rng) {
  const size_t dim = center.size();
  Vec out(dim);
  if (m == Metric::Linf) {
    std::uniform_real_distribution<double> u(-eps, eps);
    for (size_t i = 0; i < dim; ++i) out[i] = center[i] + u(rng);
    return out;
  }
  // L2: uniform direction, radius with the U^(1/d) law for a uniform ball.
  std::normal_distribution<double> gauss(0.0, 1.0);
  double norm2 = 0.0;
  Vec dir(dim);
  for (size_t i = 0; i < dim; ++i) {
    dir[i] = gauss(rng);
    norm2 += dir[i] * dir[i];
  }
  const double norm = std::sqrt(norm2);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double radius =
      norm > 0.0 ? eps * std::pow(u01(rng), 1.0 / static_cast<double>(dim)) : 0.0;
  for (size_t i = 0; i < dim; ++i) {
    out[i] = center[i] + (norm > 0.0 ? radius * dir[i] / norm : 0.0);
  }
  return out;
}

}  // namespace

AdvResult pgd(const Classifier& target, const Vec& x, int label, const AttackConfig& cfg,
              uint64_t sample_index, const Vec* warm_start) {
  cfg.validate();
  check_surrogate(target, cfg.surrogate);
  const double step = cfg.effective_step();
  const uint64_t sample_seed = derive_seed(cfg.seed, "pgd", sample_index);

  AdvResult best;
  bool have_best = false;
  bool any_nonzero_grad = false;
  int aborted = 0;

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Vec cur;
    if (restart == 0 && warm_start) {
      cur = *warm_start;
    } else if (cfg.init == AttackInit::AtInput) {
      cur = x;
    } else {
      auto rng = make_rng(derive_seed(sample_seed, "restart", static_cast<uint64_t>(restart)));
      cur = sample_in_ball(x, cfg.eps, cfg.metric, rng);
    }
    cur = clamp_domain(project_ball(cur, x, cfg.eps, cfg.metric), cfg.domain_lo, cfg.domain_hi);

    bool ok = true;
    for (int it = 0; it < cfg.n_iters; ++it) {
      SurrogateEval ev = surrogate_eval(target, cur, label, cfg.surrogate);
      if (!std::isfinite(ev.value)) {
        ok = false;
        break;
      }
      if (cfg.metric == Metric::Linf) {
        for (size_t i = 0; i < cur.size(); ++i) {
          const double g = ev.input_grad[i];
          if (g != 0.0) any_nonzero_grad = true;
          cur[i] += step * (g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0));
        }
      } else {
        double norm2 = 0.0;
        for (const double g : ev.input_grad) norm2 += g * g;
        const double norm = std::sqrt(norm2);
        if (norm > 0.0) {
          any_nonzero_grad = true;
          for (size_t i = 0; i < cur.size(); ++i) cur[i] += step * ev.input_grad[i] / norm;
        }
      }
      cur = clamp_domain(project_ball(cur, x, cfg.eps, cfg.metric), cfg.domain_lo, cfg.domain_hi);
    }
    if (!ok) {
      ++aborted;
      continue;
    }

    const double achieved = surrogate_loss(target, cur, label, cfg.surrogate);
    if (!std::isfinite(achieved)) {
      ++aborted;
      continue;
    }
    const bool success = target.predict(cur) != label;
    const bool better =
        !have_best || (success && !best.success) ||
        (success == best.success && achieved > best.achieved_loss);
    if (better) {
      best.x_adv = cur;
      best.achieved_loss = achieved;
      best.success = success;
      have_best = true;
    }
  }

  if (!have_best) {
    // Every restart aborted; fall back to the unperturbed input.
    best.x_adv = clamp_domain(x, cfg.domain_lo, cfg.domain_hi);
    best.achieved_loss = std::numeric_limits<double>::quiet_NaN();
    best.success = target.predict(best.x_adv) != label;
  }
  best.restarts_used = cfg.restarts;
  best.aborted_restarts = aborted;
  best.flat_gradient = !any_nonzero_grad;

  // Feasibility is a hard postcondition, not a sampling property.
  if (distance(best.x_adv, x, cfg.metric) > cfg.eps + 1e-6) {
    throw std::logic_error("pgd: budget postcondition violated");
  }
  for (const double v : best.x_adv) {
    if (v < cfg.domain_lo || v > cfg.domain_hi) {
      throw std::logic_error("pgd: domain postcondition violated");
    }
  }
  return best;
}

AdvResult fgsm(const Classifier& target, const Vec& x, int label, const AttackConfig& cfg,
               uint64_t sample_index) {
  AttackConfig single = cfg;
  single.n_iters = 1;
  single.restarts = 1;
  single.init = AttackInit::AtInput;
  single.step_size = cfg.eps;
  return pgd(target, x, label, single, sample_index);
}

std::string adv_batch_to_csv(const std::vector<int>& labels, const std::vector<int>& predictions,
                             const std::vector<Vec>& x_adv) {
  if (labels.size() != predictions.size() || labels.size() != x_adv.size()) {
    throw std::invalid_argument("adv_batch_to_csv: length mismatch");
  }
  std::ostringstream out;
  const size_t dim = x_adv.empty() ? 0 : x_adv[0].size();
  out << "sample,label,prediction";
  for (size_t j = 0; j < dim; ++j) out << ",x" << j;
  out << "\n";
  for (size_t i = 0; i < labels.size(); ++i) {
    out << i << "," << labels[i] << "," << predictions[i];
    for (const double v : x_adv[i]) out << "," << format_double(v);
    out << "\n";
  }
  return out.str();
}

void save_adv_batch(const std::vector<int>& labels, const std::vector<int>& predictions,
                    const std::vector<Vec>& x_adv, const std::filesystem::path& path) {
  write_file_atomic(path, adv_batch_to_csv(labels, predictions, x_adv));
}

}  // namespace replab
