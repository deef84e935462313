#include "replab/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "replab/io.hpp"
#include "replab/rng.hpp"

namespace replab {

namespace {

void check_layer_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("Mlp: need at least input and output dims");
  for (const int d : dims) {
    if (d < 1) throw std::invalid_argument("Mlp: layer dims must be >= 1");
  }
}

double dot(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

size_t Mlp::param_count() const {
  size_t n = 0;
  for (const Layer& l : layers) n += l.w.size() + l.b.size();
  return n;
}

Mlp make_mlp(const std::vector<int>& layer_dims) {
  check_layer_dims(layer_dims);
  Mlp m;
  m.layer_dims = layer_dims;
  for (size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    Layer layer;
    layer.in = layer_dims[l];
    layer.out = layer_dims[l + 1];
    layer.w.assign(static_cast<size_t>(layer.in) * layer.out, 0.0);
    layer.b.assign(layer.out, 0.0);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

Mlp make_mlp_random(const std::vector<int>& layer_dims, uint64_t seed) {
  Mlp m = make_mlp(layer_dims);
  auto rng = make_rng(seed);
  for (Layer& l : m.layers) {
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / l.in));
    for (double& w : l.w) w = he(rng);
  }
  return m;
}

Vec forward(const Mlp& model, const Vec& x) {
  return forward_cache(model, x).activations.back();
}

ForwardCache forward_cache(const Mlp& model, const Vec& x) {
  if (static_cast<int>(x.size()) != model.input_dim()) {
    throw std::invalid_argument("forward: input dim " + std::to_string(x.size()) +
                                " does not match model input " +
                                std::to_string(model.input_dim()));
  }
  ForwardCache cache;
  cache.activations.push_back(x);
  cache.pre.reserve(model.layers.size());
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const Layer& layer = model.layers[l];
    const Vec& a = cache.activations.back();
    Vec z(layer.out);
    for (int i = 0; i < layer.out; ++i) {
      z[i] = dot(&layer.w[static_cast<size_t>(i) * layer.in], a.data(), layer.in) + layer.b[i];
    }
    cache.pre.push_back(z);
    const bool last = (l + 1 == model.layers.size());
    if (!last) {
      for (double& v : z) v = std::max(0.0, v);
    }
    cache.activations.push_back(std::move(z));
  }
  return cache;
}

std::string loss_mode_name(LossMode mode) {
  switch (mode) {
    case LossMode::SquaredDistance: return "squared_distance";
    case LossMode::OneMinusCosine: return "one_minus_cosine";
    case LossMode::SoftmaxCrossEntropy: return "softmax_xent";
  }
  return "?";
}

LossMode loss_mode_from_name(const std::string& name) {
  if (name == "squared_distance") return LossMode::SquaredDistance;
  if (name == "one_minus_cosine") return LossMode::OneMinusCosine;
  if (name == "softmax_xent") return LossMode::SoftmaxCrossEntropy;
  throw std::invalid_argument("unknown loss mode: " + name);
}

namespace {

double cosine_similarity(const Vec& a, const Vec& b) {
  const double na = std::sqrt(dot(a.data(), a.data(), static_cast<int>(a.size())));
  const double nb = std::sqrt(dot(b.data(), b.data(), static_cast<int>(b.size())));
  if (na == 0.0 || nb == 0.0) {
    throw std::invalid_argument("cosine: zero-norm vector, similarity undefined");
  }
  return dot(a.data(), b.data(), static_cast<int>(a.size())) / (na * nb);
}

void check_label(int label, int k, const char* op) {
  if (label < 0 || label >= k) {
    throw std::invalid_argument(std::string(op) + ": label " + std::to_string(label) +
                                " out of range [0," + std::to_string(k) + ")");
  }
}

}  // namespace

double proto_loss(const Vec& output, int label, const PrototypeSet& protos, LossMode mode) {
  check_label(label, protos.k, "proto_loss");
  const Vec& p = protos.centers[label];
  if (output.size() != p.size()) {
    throw std::invalid_argument("proto_loss: output dim does not match prototype dim");
  }
  if (mode == LossMode::SquaredDistance) {
    const double d = distance(output, p, protos.metric);
    return d * d;
  }
  if (mode == LossMode::OneMinusCosine) {
    const double c = cosine_similarity(output, p);
    const double v = 1.0 - c;
    return v * v;
  }
  throw std::invalid_argument("proto_loss: mode must be a prototype loss");
}

double softmax_xent(const Vec& logits, int label) {
  check_label(label, static_cast<int>(logits.size()), "softmax_xent");
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double lse = 0.0;
  for (const double z : logits) lse += std::exp(z - zmax);
  return std::log(lse) - (logits[label] - zmax);
}

double loss_value(const Vec& output, int label, const LossSpec& spec) {
  if (spec.mode == LossMode::SoftmaxCrossEntropy) return softmax_xent(output, label);
  if (!spec.protos) throw std::invalid_argument("loss: prototype mode without a PrototypeSet");
  return proto_loss(output, label, *spec.protos, spec.mode);
}

LossGrad loss_with_output_grad(const Vec& output, int label, const LossSpec& spec) {
  LossGrad lg;
  lg.d_output.assign(output.size(), 0.0);
  switch (spec.mode) {
    case LossMode::SoftmaxCrossEntropy: {
      check_label(label, static_cast<int>(output.size()), "softmax_xent");
      const double zmax = *std::max_element(output.begin(), output.end());
      double lse = 0.0;
      for (const double z : output) lse += std::exp(z - zmax);
      for (size_t i = 0; i < output.size(); ++i) {
        lg.d_output[i] = std::exp(output[i] - zmax) / lse;  // softmax
      }
      lg.value = std::log(lse) - (output[label] - zmax);
      lg.d_output[label] -= 1.0;
      return lg;
    }
    case LossMode::SquaredDistance: {
      if (!spec.protos) throw std::invalid_argument("loss: prototype mode without a PrototypeSet");
      const PrototypeSet& ps = *spec.protos;
      check_label(label, ps.k, "proto_loss");
      const Vec& p = ps.centers[label];
      const double d = distance(output, p, ps.metric);
      lg.value = d * d;
      // d(d^2)/dout = 2 d * grad d; the metric subgradient handles d == 0.
      const DistanceGradient dg = distance_gradient(output, p, ps.metric);
      for (size_t i = 0; i < output.size(); ++i) lg.d_output[i] = 2.0 * d * dg.grad[i];
      return lg;
    }
    case LossMode::OneMinusCosine: {
      if (!spec.protos) throw std::invalid_argument("loss: prototype mode without a PrototypeSet");
      const PrototypeSet& ps = *spec.protos;
      check_label(label, ps.k, "proto_loss");
      const Vec& p = ps.centers[label];
      const int n = static_cast<int>(output.size());
      const double na = std::sqrt(dot(output.data(), output.data(), n));
      const double nb = std::sqrt(dot(p.data(), p.data(), n));
      if (na == 0.0 || nb == 0.0) {
        throw std::invalid_argument("cosine: zero-norm vector, similarity undefined");
      }
      const double ip = dot(output.data(), p.data(), n);
      const double cosv = ip / (na * nb);
      lg.value = (1.0 - cosv) * (1.0 - cosv);
      const double coeff = -2.0 * (1.0 - cosv);  // d loss / d cos
      for (int i = 0; i < n; ++i) {
        const double dcos = p[i] / (na * nb) - output[i] * ip / (na * na * na * nb);
        lg.d_output[i] = coeff * dcos;
      }
      return lg;
    }
  }
  throw std::logic_error("loss_with_output_grad: unhandled mode");
}

double mixed_loss(const Mlp& model, const Vec& x, const Vec& x_adv, int label, double alpha,
                  const LossSpec& base) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("mixed_loss: alpha must be in [0,1]");
  }
  const double nat = loss_value(forward(model, x), label, base);
  const double adv = loss_value(forward(model, x_adv), label, base);
  return alpha * nat + (1.0 - alpha) * adv;
}

Vec input_gradient(const Mlp& model, const ForwardCache& cache, const Vec& d_output) {
  Vec delta = d_output;
  for (size_t li = model.layers.size(); li-- > 0;) {
    const Layer& layer = model.layers[li];
    if (li + 1 < model.layers.size()) {
      // ReLU derivative on this layer's pre-activation (0 at the kink).
      for (int i = 0; i < layer.out; ++i) {
        if (cache.pre[li][i] <= 0.0) delta[i] = 0.0;
      }
    }
    Vec prev(layer.in, 0.0);
    for (int i = 0; i < layer.out; ++i) {
      const double di = delta[i];
      if (di == 0.0) continue;
      const double* row = &layer.w[static_cast<size_t>(i) * layer.in];
      for (int j = 0; j < layer.in; ++j) prev[j] += di * row[j];
    }
    delta = std::move(prev);
  }
  return delta;
}

void accumulate_param_grads(const Mlp& model, const ForwardCache& cache, const Vec& d_output,
                            double weight, std::vector<Layer>& grads) {
  Vec delta = d_output;
  for (size_t li = model.layers.size(); li-- > 0;) {
    const Layer& layer = model.layers[li];
    if (li + 1 < model.layers.size()) {
      for (int i = 0; i < layer.out; ++i) {
        if (cache.pre[li][i] <= 0.0) delta[i] = 0.0;
      }
    }
    const Vec& a_prev = cache.activations[li];
    Layer& g = grads[li];
    for (int i = 0; i < layer.out; ++i) {
      const double di = weight * delta[i];
      g.b[i] += di;
      if (di == 0.0) continue;
      double* grow = &g.w[static_cast<size_t>(i) * layer.in];
      for (int j = 0; j < layer.in; ++j) grow[j] += di * a_prev[j];
    }
    if (li == 0) break;
    Vec prev(layer.in, 0.0);
    for (int i = 0; i < layer.out; ++i) {
      const double di = delta[i];
      if (di == 0.0) continue;
      const double* row = &layer.w[static_cast<size_t>(i) * layer.in];
      for (int j = 0; j < layer.in; ++j) prev[j] += di * row[j];
    }
    delta = std::move(prev);
  }
}

GradientBundle backward(const Mlp& model, const std::vector<Sample>& batch,
                        const LossSpec& spec) {
  if (batch.empty()) throw std::invalid_argument("backward: empty batch");
  GradientBundle bundle;
  bundle.param_grads.reserve(model.layers.size());
  for (const Layer& l : model.layers) {
    Layer g;
    g.in = l.in;
    g.out = l.out;
    g.w.assign(l.w.size(), 0.0);
    g.b.assign(l.b.size(), 0.0);
    bundle.param_grads.push_back(std::move(g));
  }
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (size_t s = 0; s < batch.size(); ++s) {
    const ForwardCache cache = forward_cache(model, batch[s].x);
    for (size_t li = 0; li < cache.pre.size(); ++li) {
      for (const double v : cache.pre[li]) {
        if (!std::isfinite(v)) {
          throw std::runtime_error("backward: non-finite activation in layer " +
                                   std::to_string(li));
        }
      }
    }
    const LossGrad lg = loss_with_output_grad(cache.output(), batch[s].label, spec);
    bundle.loss_value += weight * lg.value;
    accumulate_param_grads(model, cache, lg.d_output, weight, bundle.param_grads);
    // Gradient of the mean batch loss w.r.t. this input.
    Vec gi = input_gradient(model, cache, lg.d_output);
    for (double& v : gi) v *= weight;
    bundle.input_grads.push_back(std::move(gi));
  }
  return bundle;
}

int classify_prototype(const Mlp& model, const Vec& x, const PrototypeSet& protos) {
  const Vec out = forward(model, x);
  int best = 0;
  double best_d = distance(out, protos.centers[0], protos.metric);
  for (int j = 1; j < protos.k; ++j) {
    const double d = distance(out, protos.centers[j], protos.metric);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

int classify_softmax(const Mlp& model, const Vec& x) {
  const Vec out = forward(model, x);
  int best = 0;
  for (size_t j = 1; j < out.size(); ++j) {
    if (out[j] > out[best]) best = static_cast<int>(j);
  }
  return best;
}

std::string rule_name(Rule r) {
  return r == Rule::NearestPrototype ? "nearest_prototype" : "softmax";
}

int Classifier::predict(const Vec& x) const {
  if (rule == Rule::NearestPrototype) {
    if (!protos) throw std::invalid_argument("Classifier: nearest-prototype rule needs protos");
    return classify_prototype(*model, x, *protos);
  }
  return classify_softmax(*model, x);
}

int Classifier::num_classes() const {
  return rule == Rule::NearestPrototype ? protos->k : model->output_dim();
}

Classifier make_softmax_classifier(const Mlp& model) {
  Classifier c;
  c.model = &model;
  c.rule = Rule::Softmax;
  c.training_loss = LossSpec{LossMode::SoftmaxCrossEntropy, nullptr};
  return c;
}

Classifier make_prototype_classifier(const Mlp& model, const PrototypeSet& protos,
                                     LossMode mode) {
  Classifier c;
  c.model = &model;
  c.rule = Rule::NearestPrototype;
  c.protos = &protos;
  c.training_loss = LossSpec{mode, &protos};
  return c;
}

// ---------------------------------------------------------------------------
// Serialization. Format:
//   replab-mlp v1
//   layer_dims d0 d1 ... dn
//   meta <key> <value...>          (zero or more, keys sorted)
//   layer <index> <out> <in>
//   <out lines of in weight values>
//   bias <out values>
//   ...
//   end
// ---------------------------------------------------------------------------

std::string model_to_text(const Mlp& model) {
  std::ostringstream out;
  out << "replab-mlp v1\n";
  out << "layer_dims";
  for (const int d : model.layer_dims) out << " " << d;
  out << "\n";
  for (const auto& [key, value] : model.meta) {
    out << "meta " << key << " " << value << "\n";
  }
  for (size_t li = 0; li < model.layers.size(); ++li) {
    const Layer& l = model.layers[li];
    out << "layer " << li << " " << l.out << " " << l.in << "\n";
    for (int i = 0; i < l.out; ++i) {
      for (int j = 0; j < l.in; ++j) {
        if (j) out << " ";
        out << format_double(l.w[static_cast<size_t>(i) * l.in + j]);
      }
      out << "\n";
    }
    out << "bias";
    for (int i = 0; i < l.out; ++i) out << " " << format_double(l.b[i]);
    out << "\n";
  }
  out << "end\n";
  return out.str();
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

}  // namespace

Mlp model_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  const auto next_line = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw std::runtime_error("model file: truncated, expected " + std::string(what) +
                               " after line " + std::to_string(lineno));
    }
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next_line("header");
  if (line != "replab-mlp v1") {
    throw std::runtime_error("model file: unsupported header '" + line + "'");
  }
  next_line("layer_dims");
  auto toks = tokenize(line);
  if (toks.size() < 3 || toks[0] != "layer_dims") {
    throw std::runtime_error("model file line " + std::to_string(lineno) + ": bad layer_dims");
  }
  std::vector<int> dims;
  for (size_t i = 1; i < toks.size(); ++i) {
    dims.push_back(static_cast<int>(parse_int(toks[i], "model file layer_dims")));
  }
  Mlp model = make_mlp(dims);

  next_line("meta or layer");
  while (line.rfind("meta ", 0) == 0) {
    toks = tokenize(line);
    if (toks.size() < 3) {
      throw std::runtime_error("model file line " + std::to_string(lineno) + ": bad meta line");
    }
    std::string value = toks[2];
    for (size_t i = 3; i < toks.size(); ++i) value += " " + toks[i];
    model.meta[toks[1]] = value;
    next_line("meta or layer");
  }

  for (size_t li = 0; li < model.layers.size(); ++li) {
    Layer& l = model.layers[li];
    toks = tokenize(line);
    const std::string where = "model file line " + std::to_string(lineno);
    if (toks.size() != 4 || toks[0] != "layer" ||
        parse_int(toks[1], where) != static_cast<long long>(li) ||
        parse_int(toks[2], where) != l.out || parse_int(toks[3], where) != l.in) {
      throw std::runtime_error(where + ": bad layer header, expected 'layer " +
                               std::to_string(li) + " " + std::to_string(l.out) + " " +
                               std::to_string(l.in) + "'");
    }
    for (int i = 0; i < l.out; ++i) {
      next_line("weight row");
      toks = tokenize(line);
      const std::string rw = "model file line " + std::to_string(lineno);
      if (static_cast<int>(toks.size()) != l.in) {
        throw std::runtime_error(rw + ": expected " + std::to_string(l.in) + " weights, got " +
                                 std::to_string(toks.size()));
      }
      for (int j = 0; j < l.in; ++j) {
        l.w[static_cast<size_t>(i) * l.in + j] = parse_double(toks[j], rw);
      }
    }
    next_line("bias");
    toks = tokenize(line);
    const std::string bw = "model file line " + std::to_string(lineno);
    if (toks.empty() || toks[0] != "bias" || static_cast<int>(toks.size()) != l.out + 1) {
      throw std::runtime_error(bw + ": bad bias line");
    }
    for (int i = 0; i < l.out; ++i) l.b[i] = parse_double(toks[i + 1], bw);
    next_line("layer or end");
  }
  if (line != "end") {
    throw std::runtime_error("model file: missing 'end' sentinel (truncated?)");
  }
  return model;
}

void save_model(const Mlp& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_text(model));
}

Mlp load_model(const std::filesystem::path& path) { return model_from_text(read_file(path)); }

}  // namespace replab
