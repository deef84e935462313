#include "replab/commands.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "replab/attacks.hpp"
#include "replab/evaluation.hpp"
#include "replab/io.hpp"
#include "replab/prototypes.hpp"
#include "replab/rng.hpp"

namespace replab::cmd {

namespace fs = std::filesystem;

namespace {

uint64_t experiment_seed(const ExperimentConfig& cfg) {
  return static_cast<uint64_t>(cfg.get_int("experiment", "seed"));
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) {
    throw std::invalid_argument(what + " does not exist: " + path.string());
  }
}

/// Pending output file; nothing touches the disk until every command step
/// has succeeded.
struct OutputSet {
  fs::path dir;
  std::vector<std::pair<fs::path, std::string>> files;

  void add(const std::string& name, std::string contents) {
    files.emplace_back(dir / name, std::move(contents));
  }

  std::vector<fs::path> commit() {
    std::vector<fs::path> written;
    for (const auto& [path, contents] : files) {
      write_file_atomic(path, contents);
      written.push_back(path);
    }
    return written;
  }
};

OutputSet make_outputs(const ExperimentConfig& cfg, const fs::path& out_dir) {
  OutputSet out;
  out.dir = out_dir;
  out.add("resolved.ini", cfg.resolved_text());
  return out;
}

std::string stats_csv(const SeparationStats& st) {
  std::ostringstream out;
  out << "min_pairwise,mean_pairwise,max_pairwise,objective_value,ratio_min_to_2eps\n";
  out << format_double(st.min_pairwise) << "," << format_double(st.mean_pairwise) << ","
      << format_double(st.max_pairwise) << "," << format_double(st.objective_value) << ","
      << format_double(st.ratio_min_to_2eps) << "\n";
  return out.str();
}

Dataset capped(Dataset ds, long long max_samples) {
  if (max_samples <= 0 || static_cast<long long>(ds.size()) <= max_samples) return ds;
  // keep a class-balanced prefix: samples are grouped per class by the
  // generators, so stride through the index space instead
  Dataset out;
  out.k = ds.k;
  out.shape = ds.shape;
  const double stride = static_cast<double>(ds.size()) / static_cast<double>(max_samples);
  for (long long i = 0; i < max_samples; ++i) {
    const size_t idx = static_cast<size_t>(std::floor(i * stride));
    out.inputs.push_back(ds.inputs[idx]);
    out.labels.push_back(ds.labels[idx]);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> build_datasets(const ExperimentConfig& cfg) {
  const uint64_t seed = experiment_seed(cfg);
  const std::string kind = cfg.get_string("data", "kind");
  Dataset full;
  if (kind == "gaussians") {
    full = gen_gaussians(static_cast<int>(cfg.get_int("data", "k")),
                         static_cast<int>(cfg.get_int("data", "input_dim")),
                         cfg.get_double("data", "center_spread"),
                         cfg.get_double("data", "sigma"),
                         static_cast<int>(cfg.get_int("data", "n_per_class")),
                         derive_seed(seed, "data"));
  } else if (kind == "spirals") {
    full = gen_spirals(static_cast<int>(cfg.get_int("data", "k")),
                       static_cast<int>(cfg.get_int("data", "n_per_class")),
                       cfg.get_double("data", "noise"), derive_seed(seed, "data"));
  } else if (kind == "csv") {
    const fs::path path = cfg.get_string("data", "file");
    require_file(path, "data.file");
    full = load_csv_dataset(path).data;
  } else {
    throw std::invalid_argument("data.kind must be gaussians, spirals or csv");
  }
  return split(full, cfg.get_double("data", "train_fraction"), derive_seed(seed, "split"));
}

PrototypeSet build_prototypes(const ExperimentConfig& cfg, int k, uint64_t index) {
  if (cfg.has("prototypes", "file")) {
    const fs::path path = cfg.get_string("prototypes", "file");
    require_file(path, "prototypes.file");
    PrototypeSet set = load_prototypes(path);
    if (set.k < k) {
      throw std::invalid_argument("prototype file has " + std::to_string(set.k) +
                                  " centers but the data has " + std::to_string(k) +
                                  " classes");
    }
    return set;
  }
  OptimizeOptions opts;
  opts.metric = metric_from_name(cfg.get_string("prototypes", "metric"));
  opts.r = cfg.get_double("prototypes", "r");
  opts.mu = cfg.get_double("prototypes", "mu");
  opts.epochs = static_cast<int>(cfg.get_int("prototypes", "epochs"));
  opts.eps = cfg.get_double("prototypes", "eps");
  if (cfg.has("prototypes", "bound")) opts.bound = cfg.get_double("prototypes", "bound");
  const int dim = static_cast<int>(cfg.get_int("prototypes", "D"));
  const uint64_t seed = derive_seed(experiment_seed(cfg), "protos", index);
  return optimize_prototypes(init_prototypes(k, dim, seed), opts);
}

AttackConfig build_attack(const ExperimentConfig& cfg) {
  AttackConfig atk;
  atk.metric = metric_from_name(cfg.get_string("attack", "metric"));
  atk.eps = cfg.get_double("attack", "eps");
  const std::string mode = cfg.get_string("attack", "eps_mode");
  if (mode == "fraction255") {
    atk.eps /= 255.0;
  } else if (mode != "absolute") {
    throw std::invalid_argument("attack.eps_mode must be absolute or fraction255");
  }
  atk.step_size = cfg.get_double("attack", "step_size");
  atk.n_iters = static_cast<int>(cfg.get_int("attack", "iters"));
  atk.restarts = static_cast<int>(cfg.get_int("attack", "restarts"));
  atk.init = attack_init_from_name(cfg.get_string("attack", "init"));
  atk.domain_lo = cfg.get_double("attack", "domain_lo");
  atk.domain_hi = cfg.get_double("attack", "domain_hi");
  atk.seed = derive_seed(experiment_seed(cfg), "attack");
  atk.validate();
  return atk;
}

Classifier LoadedModel::classifier() const {
  if (rule == Rule::NearestPrototype) {
    return make_prototype_classifier(model, *protos, loss_mode);
  }
  return make_softmax_classifier(model);
}

LoadedModel load_classifier(const fs::path& model_path,
                            const std::optional<fs::path>& protos_override) {
  require_file(model_path, "model file");
  LoadedModel lm;
  lm.model = load_model(model_path);
  const auto rule_it = lm.model.meta.find("rule");
  const bool wants_protos =
      rule_it != lm.model.meta.end() && rule_it->second == "nearest_prototype";
  if (wants_protos) {
    lm.rule = Rule::NearestPrototype;
    fs::path protos_path;
    if (protos_override) {
      protos_path = *protos_override;
    } else {
      const auto ref = lm.model.meta.find("prototypes");
      if (ref == lm.model.meta.end()) {
        throw std::invalid_argument("model " + model_path.string() +
                                    " uses the nearest-prototype rule but records no "
                                    "prototype reference; pass prototypes.file");
      }
      protos_path = model_path.parent_path() / ref->second;
    }
    require_file(protos_path, "prototype file");
    lm.protos = load_prototypes(protos_path);
    const auto loss_it = lm.model.meta.find("loss");
    lm.loss_mode = loss_it != lm.model.meta.end() ? loss_mode_from_name(loss_it->second)
                                                  : LossMode::SquaredDistance;
  }
  return lm;
}

namespace {

Surrogate resolve_surrogate(const ExperimentConfig& cfg, const LoadedModel& lm) {
  const std::string name = cfg.get_string("attack", "surrogate");
  if (name != "auto") return surrogate_from_name(name);
  return lm.rule == Rule::NearestPrototype ? Surrogate::PrototypeMargin
                                           : Surrogate::SoftmaxXent;
}

LoadedModel load_target_model(const ExperimentConfig& cfg, const fs::path& model_path) {
  std::optional<fs::path> protos_override;
  if (cfg.has("prototypes", "file")) protos_override = cfg.get_string("prototypes", "file");
  return load_classifier(model_path, protos_override);
}

}  // namespace

CommandResult protos_gen(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const int k = static_cast<int>(cfg.get_int("data", "k"));
  const PrototypeSet set = build_prototypes(cfg, k);
  const SeparationStats st = separation_stats(set);

  OutputSet out = make_outputs(cfg, out_dir);
  out.add("prototypes.csv", prototypes_to_csv(set));
  out.add("prototype_stats.csv", stats_csv(st));

  CommandResult res;
  res.written = out.commit();
  std::ostringstream ss;
  ss << "prototypes: k=" << set.k << " D=" << set.dim << " metric=" << metric_name(set.metric)
     << " min_sep=" << format_double(st.min_pairwise)
     << " mean_sep=" << format_double(st.mean_pairwise);
  res.summary = ss.str();
  return res;
}

CommandResult protos_stats(const ExperimentConfig& cfg, const fs::path& out_dir) {
  if (!cfg.has("prototypes", "file")) {
    throw std::invalid_argument("protos stats requires prototypes.file");
  }
  const fs::path path = cfg.get_string("prototypes", "file");
  require_file(path, "prototypes.file");
  const PrototypeSet set = load_prototypes(path);
  const SeparationStats st = separation_stats(set);

  OutputSet out = make_outputs(cfg, out_dir);
  out.add("prototype_stats.csv", stats_csv(st));

  CommandResult res;
  res.written = out.commit();
  res.summary = "stats: min=" + format_double(st.min_pairwise) +
                " mean=" + format_double(st.mean_pairwise) +
                " max=" + format_double(st.max_pairwise) +
                " ratio_min_to_2eps=" + format_double(st.ratio_min_to_2eps);
  return res;
}

namespace {

struct TrainSetup {
  Dataset train_set;
  Dataset val_set;
  TrainConfig config;
  std::optional<PrototypeSet> protos;  // owned storage for the regime
  std::vector<int> layer_dims;
  std::string regime_name;
};

TrainSetup prepare_training(const ExperimentConfig& cfg, uint64_t proto_index = 0,
                            std::optional<int> dim_override = std::nullopt) {
  TrainSetup ts;
  std::tie(ts.train_set, ts.val_set) = build_datasets(cfg);

  TrainConfig& tc = ts.config;
  tc.epochs = static_cast<int>(cfg.get_int("training", "epochs"));
  tc.batch_size = static_cast<int>(cfg.get_int("training", "batch_size"));
  tc.momentum = cfg.get_double("training", "momentum");
  tc.augment = cfg.get_bool("training", "augment");
  tc.seed = derive_seed(experiment_seed(cfg), "train", proto_index);

  const std::string sched = cfg.get_string("training", "schedule");
  if (sched == "constant") {
    tc.lr_schedule = ConstantLr{cfg.get_double("training", "lr")};
  } else if (sched == "cyclical") {
    tc.lr_schedule = CyclicalLr{cfg.get_double("training", "lr_base"),
                                cfg.get_double("training", "lr_max"),
                                static_cast<int>(cfg.get_int("training", "cycle_epochs"))};
  } else if (sched == "multistep") {
    tc.lr_schedule = MultiStepLr{cfg.get_double("training", "lr"),
                                 cfg.get_int_list("training", "decay_epochs"),
                                 cfg.get_double("training", "decay_factor")};
  } else {
    throw std::invalid_argument("training.schedule must be constant, cyclical or multistep");
  }

  ts.regime_name = cfg.get_string("training", "regime");
  const LossMode loss = loss_mode_from_name(cfg.get_string("training", "loss"));
  const int k = ts.train_set.k;
  const int input_dim = ts.train_set.dim();

  std::vector<int> hidden = cfg.get_int_list("model", "hidden");
  ts.layer_dims.push_back(input_dim);
  for (const int h : hidden) {
    if (h >= 1) ts.layer_dims.push_back(h);
  }

  const auto make_repulsive = [&]() -> RepulsiveRegime {
    ExperimentConfig pcfg = cfg;
    if (dim_override) pcfg.set("prototypes", "D", std::to_string(*dim_override));
    ts.protos = build_prototypes(pcfg, k, proto_index);
    return RepulsiveRegime{*ts.protos, loss};
  };

  if (ts.regime_name == "repulsive") {
    const RepulsiveRegime rep = make_repulsive();
    ts.layer_dims.push_back(rep.protos.dim);
    tc.regime = rep;
  } else if (ts.regime_name == "softmax") {
    ts.layer_dims.push_back(k);
    tc.regime = SoftmaxRegime{};
  } else if (ts.regime_name == "adversarial") {
    AdvTrainRegime at;
    at.alpha = cfg.get_double("training", "alpha");
    at.attack = build_attack(cfg);
    const std::string base = cfg.get_string("training", "adv_base");
    if (base == "repulsive") {
      const RepulsiveRegime rep = make_repulsive();
      ts.layer_dims.push_back(rep.protos.dim);
      at.base = rep;
      // adaptive inner attack for a prototype-rule base
      if (cfg.get_string("attack", "surrogate") == "auto") {
        at.attack.surrogate = Surrogate::PrototypeMargin;
      } else {
        at.attack.surrogate = surrogate_from_name(cfg.get_string("attack", "surrogate"));
      }
    } else if (base == "softmax") {
      ts.layer_dims.push_back(k);
      at.base = SoftmaxRegime{};
      at.attack.surrogate = cfg.get_string("attack", "surrogate") == "auto"
                                ? Surrogate::SoftmaxXent
                                : surrogate_from_name(cfg.get_string("attack", "surrogate"));
    } else {
      throw std::invalid_argument("training.adv_base must be softmax or repulsive");
    }
    tc.regime = at;
  } else {
    throw std::invalid_argument("training.regime must be repulsive, softmax or adversarial");
  }

  if (cfg.get_bool("training", "early_stop")) {
    tc.early_stop.enabled = true;
    tc.early_stop.eval_every_epochs = static_cast<int>(cfg.get_int("training", "eval_every"));
    tc.early_stop.patience = static_cast<int>(cfg.get_int("training", "patience"));
    tc.early_stop.subset_size = static_cast<int>(cfg.get_int("training", "es_subset"));
    tc.early_stop.attack = build_attack(cfg);
    tc.early_stop.attack.n_iters = static_cast<int>(cfg.get_int("training", "es_iters"));
    tc.early_stop.attack.step_size = 0.0;  // rescale to the cheap iteration count
    if (cfg.get_string("attack", "surrogate") == "auto") {
      tc.early_stop.attack.surrogate =
          ts.protos ? Surrogate::PrototypeMargin : Surrogate::SoftmaxXent;
    }
  }
  return ts;
}

}  // namespace

CommandResult train_model(const ExperimentConfig& cfg, const fs::path& out_dir) {
  TrainSetup ts = prepare_training(cfg);
  const uint64_t seed = experiment_seed(cfg);

  const Mlp init = make_mlp_random(ts.layer_dims, derive_seed(seed, "model-init"));
  TrainResult tr = train(init, ts.train_set, ts.val_set, ts.config);

  tr.model.meta["regime"] = ts.regime_name;
  tr.model.meta["loss"] = cfg.get_string("training", "loss");
  tr.model.meta["seed"] = std::to_string(seed);
  const bool proto_rule = ts.protos.has_value();
  tr.model.meta["rule"] = proto_rule ? "nearest_prototype" : "softmax";
  if (proto_rule) tr.model.meta["prototypes"] = "prototypes.csv";

  OutputSet out = make_outputs(cfg, out_dir);
  if (proto_rule) out.add("prototypes.csv", prototypes_to_csv(*ts.protos));
  out.add("model.mlp", model_to_text(tr.model));
  out.add("history.csv", history_to_csv(tr.history));

  const Classifier clf = regime_classifier(tr.model, ts.config.regime);
  const double nat = accuracy(clf, ts.val_set);

  CommandResult res;
  res.written = out.commit();
  std::ostringstream ss;
  ss << "train: regime=" << ts.regime_name << " epochs_run=" << tr.history.records.size()
     << " val_acc=" << format_double(nat);
  if (ts.config.early_stop.enabled) {
    ss << " best_epoch=" << tr.history.best_epoch
       << " best_rob=" << format_double(tr.history.best_robust_acc);
  }
  res.summary = ss.str();
  return res;
}

namespace {

struct EvalSetup {
  LoadedModel lm;
  Dataset eval_set;
  AttackConfig attack;
};

EvalSetup prepare_eval(const ExperimentConfig& cfg) {
  if (!cfg.has("experiment", "model_file")) {
    throw std::invalid_argument("this command requires experiment.model_file");
  }
  EvalSetup es;
  es.lm = load_target_model(cfg, cfg.get_string("experiment", "model_file"));
  auto [train_set, val_set] = build_datasets(cfg);
  es.eval_set = capped(std::move(val_set), cfg.get_int("evaluation", "max_samples"));
  es.attack = build_attack(cfg);
  es.attack.surrogate = resolve_surrogate(cfg, es.lm);
  return es;
}

}  // namespace

CommandResult attack_model(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const EvalSetup es = prepare_eval(cfg);
  const Classifier clf = es.lm.classifier();
  const RobustEval ev = robust_accuracy(clf, es.eval_set, es.attack);

  std::vector<Vec> x_adv;
  x_adv.reserve(ev.results.size());
  for (const AdvResult& r : ev.results) x_adv.push_back(r.x_adv);

  std::ostringstream summary_csv;
  summary_csv << "natural_acc,robust_acc,metric,eps,step_size,iters,restarts,surrogate\n"
              << format_double(ev.natural_acc) << "," << format_double(ev.robust_acc) << ","
              << metric_name(es.attack.metric) << "," << format_double(es.attack.eps) << ","
              << format_double(es.attack.effective_step()) << "," << es.attack.n_iters << ","
              << es.attack.restarts << "," << surrogate_name(es.attack.surrogate) << "\n";

  OutputSet out = make_outputs(cfg, out_dir);
  out.add("attack_summary.csv", summary_csv.str());
  out.add("adversarial.csv", adv_batch_to_csv(es.eval_set.labels, ev.adv_pred, x_adv));

  CommandResult res;
  res.written = out.commit();
  res.summary = "attack: natural=" + format_double(ev.natural_acc) +
                " robust=" + format_double(ev.robust_acc) + " eps=" +
                format_double(es.attack.eps) + " (" + surrogate_name(es.attack.surrogate) + ")";
  return res;
}

CommandResult curve(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const EvalSetup es = prepare_eval(cfg);
  const Classifier clf = es.lm.classifier();
  const std::vector<double> eps_list = cfg.get_double_list("evaluation", "eps_list");
  const RobustnessCurve rc = robustness_curve(clf, es.eval_set, eps_list, es.attack);

  PlotSeries series;
  series.label = cfg.get_string("experiment", "model_file");
  series.x = rc.eps_values;
  series.y = rc.robust_acc;

  OutputSet out = make_outputs(cfg, out_dir);
  out.add("curve.csv", curve_to_csv(rc));
  out.add("first_failure.csv", first_failure_to_csv(rc));
  out.add("curve.svg",
          render_line_plot_svg("Robustness curve", "eps", "robust accuracy", {series}));

  CommandResult res;
  res.written = out.commit();
  std::ostringstream ss;
  ss << "curve: " << rc.eps_values.size() << " points, robust["
     << format_double(rc.eps_values.front()) << "]=" << format_double(rc.robust_acc.front())
     << " robust[" << format_double(rc.eps_values.back())
     << "]=" << format_double(rc.robust_acc.back());
  res.summary = ss.str();
  return res;
}

CommandResult confusion(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const EvalSetup es = prepare_eval(cfg);
  const Classifier clf = es.lm.classifier();
  const ConfusionMatrix nat = natural_confusion(clf, es.eval_set);
  const ConfusionMatrix adv = adv_confusion(clf, es.eval_set, es.attack);

  OutputSet out = make_outputs(cfg, out_dir);
  out.add("confusion_natural.csv", confusion_to_csv(nat, false));
  out.add("confusion_adv_counts.csv", confusion_to_csv(adv, false));
  out.add("confusion_adv_rownorm.csv", confusion_to_csv(adv, true));

  CommandResult res;
  res.written = out.commit();
  res.summary = "confusion: trace_natural=" + std::to_string(nat.trace()) +
                " trace_adversarial=" + std::to_string(adv.trace()) + " of " +
                std::to_string(adv.total());
  return res;
}

CommandResult transfer(const ExperimentConfig& cfg, const fs::path& out_dir) {
  if (!cfg.has("experiment", "substitute_file") || !cfg.has("experiment", "targets")) {
    throw std::invalid_argument(
        "transfer requires experiment.substitute_file and experiment.targets");
  }
  const LoadedModel substitute =
      load_target_model(cfg, cfg.get_string("experiment", "substitute_file"));

  std::vector<std::string> target_names;
  for (const std::string& t : split_fields(cfg.get_string("experiment", "targets"), ',')) {
    if (!t.empty()) target_names.push_back(t);
  }
  if (target_names.empty()) throw std::invalid_argument("experiment.targets is empty");

  std::vector<std::string> proto_overrides(target_names.size());
  if (cfg.has("experiment", "target_protos")) {
    const auto po = split_fields(cfg.get_string("experiment", "target_protos"), ',');
    for (size_t i = 0; i < po.size() && i < proto_overrides.size(); ++i) {
      proto_overrides[i] = po[i];
    }
  }

  std::vector<LoadedModel> targets;
  targets.reserve(target_names.size());
  for (size_t i = 0; i < target_names.size(); ++i) {
    std::optional<fs::path> override;
    if (!proto_overrides[i].empty()) override = fs::path(proto_overrides[i]);
    targets.push_back(load_classifier(target_names[i], override));
  }

  auto [train_set, val_set] = build_datasets(cfg);
  const Dataset eval_set = capped(std::move(val_set), cfg.get_int("evaluation", "max_samples"));

  AttackConfig atk = build_attack(cfg);
  atk.surrogate = resolve_surrogate(cfg, substitute);

  std::vector<Classifier> target_views;
  for (const LoadedModel& lm : targets) target_views.push_back(lm.classifier());
  const TransferResult tr = transfer_eval(substitute.classifier(), target_views, eval_set, atk);

  std::ostringstream csv;
  csv << "target,natural_acc,transfer_robust_acc\n";
  for (size_t i = 0; i < target_names.size(); ++i) {
    csv << csv_escape(target_names[i]) << "," << format_double(tr.natural_acc[i]) << ","
        << format_double(tr.robust_acc[i]) << "\n";
  }
  csv << csv_escape("(substitute white-box)") << "," << ""
      << "," << format_double(tr.substitute_whitebox) << "\n";

  OutputSet out = make_outputs(cfg, out_dir);
  out.add("transfer.csv", csv.str());
  out.add("transfer_batch.csv",
          adv_batch_to_csv(eval_set.labels, tr.substitute_pred, tr.crafted));

  CommandResult res;
  res.written = out.commit();
  std::ostringstream ss;
  ss << "transfer: substitute_whitebox=" << format_double(tr.substitute_whitebox);
  for (size_t i = 0; i < target_names.size(); ++i) {
    ss << " " << target_names[i] << "=" << format_double(tr.robust_acc[i]);
  }
  res.summary = ss.str();
  return res;
}

CommandResult sweep_dims(const ExperimentConfig& cfg, const fs::path& out_dir) {
  const std::vector<int> dims = cfg.get_int_list("experiment", "dims");
  if (dims.empty()) throw std::invalid_argument("experiment.dims is empty");
  if (cfg.get_string("training", "regime") != "repulsive") {
    throw std::invalid_argument("sweep-dims runs the repulsive regime; set training.regime");
  }

  std::ostringstream csv;
  csv << "D,min_separation,natural_acc,robust_acc\n";
  std::ostringstream ss;
  ss << "sweep-dims:";

  for (size_t di = 0; di < dims.size(); ++di) {
    TrainSetup ts = prepare_training(cfg, di, dims[di]);
    const Mlp init = make_mlp_random(
        ts.layer_dims, derive_seed(experiment_seed(cfg), "model-init", di));
    const TrainResult tr = train(init, ts.train_set, ts.val_set, ts.config);
    const Classifier clf = regime_classifier(tr.model, ts.config.regime);

    AttackConfig atk = build_attack(cfg);
    atk.surrogate = cfg.get_string("attack", "surrogate") == "auto"
                        ? Surrogate::PrototypeMargin
                        : surrogate_from_name(cfg.get_string("attack", "surrogate"));

    const RobustEval ev = robust_accuracy(clf, ts.val_set, atk);
    const SeparationStats st = separation_stats(*ts.protos);
    csv << dims[di] << "," << format_double(st.min_pairwise) << ","
        << format_double(ev.natural_acc) << "," << format_double(ev.robust_acc) << "\n";
    ss << " D=" << dims[di] << " nat=" << format_double(ev.natural_acc)
       << " rob=" << format_double(ev.robust_acc);
  }

  OutputSet out = make_outputs(cfg, out_dir);
  out.add("sweep_dims.csv", csv.str());

  CommandResult res;
  res.written = out.commit();
  res.summary = ss.str();
  return res;
}

}  // namespace replab::cmd
