#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "replab/geometry.hpp"
#include "replab/prototypes.hpp"

namespace replab {

/// Fully connected feedforward network: ReLU hidden layers, identity output.
/// Weight rows are indexed by output unit, columns by input unit.
struct Layer {
  int in = 0;
  int out = 0;
  std::vector<double> w;  // row-major, out x in
  std::vector<double> b;  // out
};

struct Mlp {
  std::vector<int> layer_dims;  // input dim, hidden dims..., output dim
  std::vector<Layer> layers;
  std::map<std::string, std::string> meta;

  int input_dim() const { return layer_dims.front(); }
  int output_dim() const { return layer_dims.back(); }
  size_t param_count() const;
};

/// Zero-initialized network of the given shape.
Mlp make_mlp(const std::vector<int>& layer_dims);

/// He-normal weights, zero biases, seeded.
Mlp make_mlp_random(const std::vector<int>& layer_dims, uint64_t seed);

Vec forward(const Mlp& model, const Vec& x);

/// Activations recorded during a forward pass, consumed by backprop.
struct ForwardCache {
  std::vector<Vec> activations;  // a_0 = x, a_1 .. a_L (post-activation)
  std::vector<Vec> pre;          // z_1 .. z_L (pre-activation)
  const Vec& output() const { return activations.back(); }
};

ForwardCache forward_cache(const Mlp& model, const Vec& x);

enum class LossMode { SquaredDistance, OneMinusCosine, SoftmaxCrossEntropy };

std::string loss_mode_name(LossMode mode);
LossMode loss_mode_from_name(const std::string& name);

/// Loss selector: the prototype modes need a PrototypeSet, softmax does not.
struct LossSpec {
  LossMode mode = LossMode::SoftmaxCrossEntropy;
  const PrototypeSet* protos = nullptr;
};

/// SquaredDistance: d(output, p_label)^2 under the set's metric.
/// OneMinusCosine: (1 - cos(output, p_label))^2; zero-norm output is an error.
double proto_loss(const Vec& output, int label, const PrototypeSet& protos, LossMode mode);

/// -log softmax(logits)[label], max-subtracted for stability.
double softmax_xent(const Vec& logits, int label);

double loss_value(const Vec& output, int label, const LossSpec& spec);

/// Loss and its gradient w.r.t. the model output (the starting cotangent for
/// reverse mode).
struct LossGrad {
  double value = 0.0;
  Vec d_output;
};
LossGrad loss_with_output_grad(const Vec& output, int label, const LossSpec& spec);

/// Convex combination of the base loss on x and on x_adv (alpha weighting the
/// natural term).
double mixed_loss(const Mlp& model, const Vec& x, const Vec& x_adv, int label, double alpha,
                  const LossSpec& base);

struct GradientBundle {
  double loss_value = 0.0;           // mean over the batch
  std::vector<Layer> param_grads;    // same shapes as model.layers
  std::vector<Vec> input_grads;      // one per batch element
};

struct Sample {
  Vec x;
  int label = 0;
};

/// Exact reverse-mode gradients of the mean batch loss w.r.t. parameters and
/// inputs, accumulated in deterministic batch order.
GradientBundle backward(const Mlp& model, const std::vector<Sample>& batch, const LossSpec& spec);

/// Gradient of a scalar-valued output functional: backpropagates the given
/// output cotangent to the input.
Vec input_gradient(const Mlp& model, const ForwardCache& cache, const Vec& d_output);

/// Accumulates parameter gradients for one sample, scaled by `weight`.
void accumulate_param_grads(const Mlp& model, const ForwardCache& cache, const Vec& d_output,
                            double weight, std::vector<Layer>& grads);

/// argmin over prototypes of d(f(x), p_j); ties go to the lowest class id.
int classify_prototype(const Mlp& model, const Vec& x, const PrototypeSet& protos);

/// argmax of logits, lowest-index tie-break.
int classify_softmax(const Mlp& model, const Vec& x);

enum class Rule { NearestPrototype, Softmax };

std::string rule_name(Rule r);

/// A model together with its inference rule (and prototypes when the rule
/// needs them). Non-owning view; the referents must outlive it.
struct Classifier {
  const Mlp* model = nullptr;
  Rule rule = Rule::Softmax;
  const PrototypeSet* protos = nullptr;
  LossSpec training_loss{LossMode::SoftmaxCrossEntropy, nullptr};

  int predict(const Vec& x) const;
  int num_classes() const;
};

Classifier make_softmax_classifier(const Mlp& model);
Classifier make_prototype_classifier(const Mlp& model, const PrototypeSet& protos,
                                     LossMode mode = LossMode::SquaredDistance);

/// Versioned textual container; decimal fields round-trip bit-exactly.
void save_model(const Mlp& model, const std::filesystem::path& path);
Mlp load_model(const std::filesystem::path& path);

std::string model_to_text(const Mlp& model);
Mlp model_from_text(const std::string& text);

}  // namespace replab
