// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit code is the failure count.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "replab/commands.hpp"
#include "replab/evaluation.hpp"
#include "replab/io.hpp"
#include "replab/rng.hpp"
#include "replab/training.hpp"
#include "test_util.hpp"

using namespace replab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double now_s() {
  using clock = std::chrono::steady_clock;
  static const auto start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Criterion 1: analytic gradients vs central finite differences,
// parameters and inputs, all three loss modes, MLPs up to 3 hidden layers.
// ---------------------------------------------------------------------------
Outcome criterion_gradient_oracle() {
  std::mt19937_64 rng(101);
  const double h = 1e-5;
  double worst = 0.0;
  long long probes = 0;

  const std::vector<std::vector<int>> shapes{
      {4, 8, 3}, {4, 10, 6, 3}, {4, 12, 8, 6, 3}};  // 1, 2, 3 hidden layers

  for (const LossMode mode :
       {LossMode::SquaredDistance, LossMode::OneMinusCosine, LossMode::SoftmaxCrossEntropy}) {
    long long mode_probes = 0;
    for (size_t si = 0; si < shapes.size(); ++si) {
      std::vector<int> dims = shapes[si];
      PrototypeSet ps;
      if (mode != LossMode::SoftmaxCrossEntropy) {
        dims.back() = 5;  // output dim need not match k for prototype losses
        ps.k = 3;
        ps.dim = 5;
        ps.metric = Metric::L2;
        for (int j = 0; j < ps.k; ++j) ps.centers.push_back(testutil::random_vec(rng, 5, -2, 2));
        ps.eps = 1.0;
      }
      Mlp model = make_mlp_random(dims, 500 + si);
      const LossSpec spec{mode, mode == LossMode::SoftmaxCrossEntropy ? nullptr : &ps};

      std::vector<Sample> batch;
      for (int b = 0; b < 3; ++b) {
        batch.push_back({testutil::random_vec(rng, 4, 0, 1), b % 3});
      }
      const GradientBundle analytic = backward(model, batch, spec);

      std::vector<double> flat;
      for (const Layer& l : analytic.param_grads) {
        flat.insert(flat.end(), l.w.begin(), l.w.end());
        flat.insert(flat.end(), l.b.begin(), l.b.end());
      }
      std::vector<double*> params;
      for (Layer& l : model.layers) {
        for (double& w : l.w) params.push_back(&w);
        for (double& b : l.b) params.push_back(&b);
      }
      const auto batch_loss = [&]() {
        double sum = 0.0;
        for (const Sample& s : batch) sum += loss_value(forward(model, s.x), s.label, spec);
        return sum / static_cast<double>(batch.size());
      };

      std::uniform_int_distribution<size_t> pick(0, params.size() - 1);
      for (int probe = 0; probe < 30; ++probe) {
        const size_t pi = pick(rng);
        const double saved = *params[pi];
        *params[pi] = saved + h;
        const double up = batch_loss();
        *params[pi] = saved - h;
        const double down = batch_loss();
        *params[pi] = saved;
        const double fd = (up - down) / (2 * h);
        worst = std::max(worst, testutil::rel_err(flat[pi], fd));
        ++mode_probes;
      }
      for (size_t b = 0; b < batch.size(); ++b) {
        for (size_t ci = 0; ci < batch[b].x.size(); ++ci) {
          Vec hi = batch[b].x, lo = batch[b].x;
          hi[ci] += h;
          lo[ci] -= h;
          const double fd = (loss_value(forward(model, hi), batch[b].label, spec) -
                             loss_value(forward(model, lo), batch[b].label, spec)) /
                            (2 * h * static_cast<double>(batch.size()));
          worst = std::max(worst, testutil::rel_err(analytic.input_grads[b][ci], fd));
          ++mode_probes;
        }
      }
    }
    if (mode_probes < 100) {
      return {false, "only " + std::to_string(mode_probes) + " probes for mode " +
                         loss_mode_name(mode)};
    }
    probes += mode_probes;
  }
  std::ostringstream ss;
  ss << probes << " probes, max rel err " << worst;
  return {worst < 1e-4, ss.str()};
}

// ---------------------------------------------------------------------------
// Criterion 2: two-point L2 repulsion closed form.
// ---------------------------------------------------------------------------
Outcome criterion_closed_form() {
  OptimizeOptions opts;
  opts.r = 1.0;
  opts.mu = 0.01;
  opts.epochs = 100;
  opts.metric = Metric::L2;
  const PrototypeSet set = optimize_prototypes({{-1, 0}, {1, 0}}, opts);
  const double sep = distance(set.centers[0], set.centers[1], Metric::L2);
  std::ostringstream ss;
  ss << "sep(100) = " << format_double(sep) << ", expected 4.0";
  return {std::abs(sep - 4.0) < 1e-9, ss.str()};
}

// ---------------------------------------------------------------------------
// Criterion 3: k=3, D=2, 50 steps vs numerical-gradient trajectory.
// ---------------------------------------------------------------------------
Outcome criterion_trajectory_oracle() {
  const int k = 3, dim = 2, steps = 50;
  const double r = 1.0, mu = 0.01, h = 1e-6;
  const std::vector<Vec> start = init_prototypes(k, dim, 303);

  std::vector<Vec> oracle = start;
  for (int step = 0; step < steps; ++step) {
    Vec flat;
    for (const Vec& c : oracle) flat.insert(flat.end(), c.begin(), c.end());
    const Vec grad = testutil::numeric_grad(
        [&](const Vec& q) {
          std::vector<Vec> cs(k, Vec(dim));
          for (int i = 0; i < k; ++i) {
            for (int d = 0; d < dim; ++d) cs[i][d] = q[static_cast<size_t>(i) * dim + d];
          }
          return repulsion_objective(cs, r, Metric::L2);
        },
        flat, h);
    for (int i = 0; i < k; ++i) {
      for (int d = 0; d < dim; ++d) oracle[i][d] -= mu * grad[static_cast<size_t>(i) * dim + d];
    }
  }

  OptimizeOptions opts;
  opts.r = r;
  opts.mu = mu;
  opts.epochs = steps;
  opts.metric = Metric::L2;
  const PrototypeSet set = optimize_prototypes(start, opts);

  double max_dev = 0.0;
  for (int i = 0; i < k; ++i) {
    for (int d = 0; d < dim; ++d) {
      max_dev = std::max(max_dev, std::abs(set.centers[i][d] - oracle[i][d]));
    }
  }
  std::ostringstream ss;
  ss << "max coordinate deviation " << max_dev;
  return {max_dev < 1e-6, ss.str()};
}

// ---------------------------------------------------------------------------
// Criterion 4: attack feasibility across >= 10,000 adversarial examples,
// both metrics, plus exact FGSM == PGD(n=1, AtInput, step=eps).
// ---------------------------------------------------------------------------
Outcome criterion_attack_feasibility() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> ue(0.0, 0.4);
  long long generated = 0, violations = 0, fgsm_mismatches = 0;

  for (const Metric metric : {Metric::Linf, Metric::L2}) {
    for (int model_idx = 0; model_idx < 5; ++model_idx) {
      const Mlp m = make_mlp_random({4, 10, 3}, 4000 + model_idx);
      const Classifier clf = make_softmax_classifier(m);
      for (int i = 0; i < 1100; ++i) {
        const Vec x = testutil::random_vec(rng, 4, 0, 1);
        AttackConfig cfg;
        cfg.metric = metric;
        cfg.eps = ue(rng);
        cfg.n_iters = 3;
        cfg.restarts = 2;
        cfg.init = (i % 2 == 0) ? AttackInit::AtInput : AttackInit::UniformInBall;
        cfg.surrogate = Surrogate::SoftmaxXent;
        cfg.seed = i;
        const AdvResult res = pgd(clf, x, i % 3, cfg, i);
        ++generated;
        if (distance(res.x_adv, x, metric) > cfg.eps + 1e-6) ++violations;
        for (const double v : res.x_adv) {
          if (v < 0.0 || v > 1.0) {
            ++violations;
            break;
          }
        }

        if (i % 4 == 0) {
          AttackConfig fcfg = cfg;
          const AdvResult a = fgsm(clf, x, i % 3, fcfg, i);
          AttackConfig pcfg = cfg;
          pcfg.n_iters = 1;
          pcfg.restarts = 1;
          pcfg.init = AttackInit::AtInput;
          pcfg.step_size = cfg.eps;
          const AdvResult b = pgd(clf, x, i % 3, pcfg, i);
          ++generated;
          if (a.x_adv != b.x_adv || a.success != b.success ||
              a.achieved_loss != b.achieved_loss) {
            ++fgsm_mismatches;
          }
        }
      }
    }
  }
  std::ostringstream ss;
  ss << generated << " adversarial examples, " << violations << " feasibility violations, "
     << fgsm_mismatches << " fgsm/pgd mismatches";
  return {generated >= 10000 && violations == 0 && fgsm_mismatches == 0, ss.str()};
}

// ---------------------------------------------------------------------------
// Criterion 5: robustness_curve monotone non-increasing, eps=0 point equals
// natural accuracy exactly.
// ---------------------------------------------------------------------------
Outcome criterion_curve_monotone() {
  std::mt19937_64 rng(505);
  int runs = 0;
  for (const Metric metric : {Metric::Linf, Metric::L2}) {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      const Dataset ds = gen_gaussians(3, 4, 1.0, 0.1, 30, seed);
      const Mlp m = make_mlp_random({4, 12, 3}, 5000 + seed);
      const Classifier clf = make_softmax_classifier(m);
      AttackConfig base;
      base.metric = metric;
      base.n_iters = 5;
      base.restarts = 2;
      base.init = AttackInit::UniformInBall;
      base.surrogate = Surrogate::SoftmaxXent;
      base.seed = seed;
      const std::vector<double> eps{0.0, 0.02, 0.05, 0.1, 0.2, 0.4};
      const RobustnessCurve curve = robustness_curve(clf, ds, eps, base);
      if (curve.robust_acc.front() != accuracy(clf, ds)) {
        return {false, "curve[eps=0] differs from natural accuracy"};
      }
      for (size_t i = 1; i < curve.robust_acc.size(); ++i) {
        if (curve.robust_acc[i] > curve.robust_acc[i - 1]) {
          return {false, "curve increased between eps " + format_double(eps[i - 1]) + " and " +
                             format_double(eps[i])};
        }
      }
      ++runs;
    }
  }
  return {true, std::to_string(runs) + " curves, all monotone with exact eps=0 point"};
}

// ---------------------------------------------------------------------------
// Shared harness for criteria 6-9: the desk-scale method reproduction.
// 5-class Gaussian blobs in 10-D (500 train / 200 test per class),
// prototypes at D=50, 2-hidden-layer MLPs, PGD-20 at eps* = 0.12 (chosen so
// the softmax baseline falls below 40% robust accuracy).
// ---------------------------------------------------------------------------
struct SeedRun {
  uint64_t seed;
  double nat_rep, nat_soft;
  double rob_rep, rob_soft;          // PGD-20 at eps*
  double curve_rep_e, curve_rep_2e;  // cumulative curve at e and 2e
  double curve_soft_e, curve_soft_2e;
  Mlp rep_model, soft_model;
  PrototypeSet protos;
  Dataset train_set, test_set;
};

constexpr double kEpsStar = 0.12;
constexpr int kProtoDim = 50;

// Evaluation protocol: PGD-20 with 5 random restarts. A single restart left
// the white-box attack weaker than black-box transfer on these models, which
// is the classic sign of an under-powered evaluation; restarts restore the
// expected ordering.
AttackConfig pgd20(Surrogate s, uint64_t seed, double eps = kEpsStar) {
  AttackConfig atk;
  atk.metric = Metric::Linf;
  atk.eps = eps;
  atk.n_iters = 20;
  atk.restarts = 5;
  atk.init = AttackInit::UniformInBall;
  atk.surrogate = s;
  atk.seed = seed;
  return atk;
}

SeedRun run_seed(uint64_t seed, int proto_dim = kProtoDim) {
  SeedRun run;
  run.seed = seed;
  const Dataset full = gen_gaussians(5, 10, 1.0, 0.08, 700, derive_seed(seed, "data"));
  std::tie(run.train_set, run.test_set) = split(full, 5.0 / 7.0, derive_seed(seed, "split"));

  OptimizeOptions popts;
  popts.epochs = 100;
  popts.mu = 0.01;
  popts.r = 1.0;
  popts.eps = 1.0;
  popts.metric = Metric::L2;
  run.protos =
      optimize_prototypes(init_prototypes(5, proto_dim, derive_seed(seed, "protos")), popts);

  TrainConfig rep_cfg;
  rep_cfg.epochs = 40;
  rep_cfg.batch_size = 64;
  rep_cfg.lr_schedule = CyclicalLr{0.0005, 0.01, 10};
  rep_cfg.regime = RepulsiveRegime{run.protos, LossMode::SquaredDistance};
  rep_cfg.seed = derive_seed(seed, "train-rep");
  run.rep_model = train(make_mlp_random({10, 64, 64, proto_dim}, derive_seed(seed, "init-rep")),
                        run.train_set, run.test_set, rep_cfg)
                      .model;

  TrainConfig soft_cfg = rep_cfg;
  soft_cfg.regime = SoftmaxRegime{};
  soft_cfg.seed = derive_seed(seed, "train-soft");
  run.soft_model = train(make_mlp_random({10, 64, 64, 5}, derive_seed(seed, "init-soft")),
                         run.train_set, run.test_set, soft_cfg)
                       .model;

  const Classifier rep = make_prototype_classifier(run.rep_model, run.protos);
  const Classifier soft = make_softmax_classifier(run.soft_model);
  run.nat_rep = accuracy(rep, run.test_set);
  run.nat_soft = accuracy(soft, run.test_set);
  run.rob_rep =
      robust_accuracy(rep, run.test_set, pgd20(Surrogate::PrototypeMargin, derive_seed(seed, "atk")))
          .robust_acc;
  run.rob_soft =
      robust_accuracy(soft, run.test_set, pgd20(Surrogate::SoftmaxXent, derive_seed(seed, "atk")))
          .robust_acc;

  const std::vector<double> eps_points{kEpsStar / 2.0, kEpsStar};
  const RobustnessCurve crep = robustness_curve(
      rep, run.test_set, eps_points, pgd20(Surrogate::PrototypeMargin, derive_seed(seed, "curve")));
  const RobustnessCurve csoft = robustness_curve(
      soft, run.test_set, eps_points, pgd20(Surrogate::SoftmaxXent, derive_seed(seed, "curve")));
  run.curve_rep_e = crep.robust_acc[0];
  run.curve_rep_2e = crep.robust_acc[1];
  run.curve_soft_e = csoft.robust_acc[0];
  run.curve_soft_2e = csoft.robust_acc[1];
  return run;
}

std::vector<SeedRun> g_runs;

void ensure_runs() {
  if (!g_runs.empty()) return;
  for (const uint64_t seed : {1ULL, 2ULL, 3ULL}) g_runs.push_back(run_seed(seed));
}

// Criterion 6: repulsive vs softmax baseline, natural within 3 points and
// strictly higher PGD-20 robustness in >= 2 of 3 seeds.
Outcome criterion_method_reproduction() {
  ensure_runs();
  int wins = 0;
  std::ostringstream ss;
  for (const SeedRun& run : g_runs) {
    const bool baseline_broken = run.rob_soft < 0.40;
    const bool natural_ok = run.nat_rep >= run.nat_soft - 0.03;
    const bool robust_win = run.rob_rep > run.rob_soft;
    if (baseline_broken && natural_ok && robust_win) ++wins;
    ss << "[seed " << run.seed << " nat " << format_double(run.nat_rep) << "/"
       << format_double(run.nat_soft) << " rob " << format_double(run.rob_rep) << "/"
       << format_double(run.rob_soft) << "] ";
  }
  ss << wins << "/3 seeds favor the prototype model at eps=" << kEpsStar;
  return {wins >= 2, ss.str()};
}

// Criterion 7: retention robust(2e)/robust(e) higher for the repulsive model.
Outcome criterion_curve_slope() {
  ensure_runs();
  int wins = 0;
  std::ostringstream ss;
  for (const SeedRun& run : g_runs) {
    if (run.curve_rep_e <= 0.0 || run.curve_soft_e <= 0.0) {
      ss << "[seed " << run.seed << " degenerate curve] ";
      continue;
    }
    const double ret_rep = run.curve_rep_2e / run.curve_rep_e;
    const double ret_soft = run.curve_soft_2e / run.curve_soft_e;
    if (ret_rep > ret_soft) ++wins;
    ss << "[seed " << run.seed << " retention " << format_double(ret_rep) << " vs "
       << format_double(ret_soft) << "] ";
  }
  ss << wins << "/3 seeds retain more robustness when eps doubles";
  return {wins >= 2, ss.str()};
}

// Criterion 8: output-dimension sweep D in {k, 5k, 10k}; the table is the
// deliverable, the trend is recorded but not hard-failed. Robust accuracy is
// averaged over the three fixed seeds to keep single-run noise out of the
// recorded trend; the D = 10k column reuses the criterion-6 runs.
Outcome criterion_dimension_sweep() {
  ensure_runs();
  std::ostringstream table;
  table << "D,mean_natural_acc,mean_robust_acc";
  double rob_low = 0.0, rob_high = 0.0;
  for (const int dim : {5, 25, 50}) {
    double nat = 0.0, rob = 0.0;
    for (const uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      if (dim == kProtoDim) {
        const SeedRun& run = g_runs[seed - 1];
        nat += run.nat_rep;
        rob += run.rob_rep;
      } else {
        const SeedRun run = run_seed(seed, dim);
        nat += run.nat_rep;
        rob += run.rob_rep;
      }
    }
    nat /= 3.0;
    rob /= 3.0;
    table << " | " << dim << "," << format_double(nat) << "," << format_double(rob);
    if (dim == 5) rob_low = rob;
    if (dim == 50) rob_high = rob;
  }
  const bool trend = rob_high >= rob_low;
  std::ostringstream ss;
  ss << table.str() << " | trend robust(D=10k) >= robust(D=k): "
     << (trend ? "held" : "NOT held (recorded, not failed)");
  return {true, ss.str()};
}

// Criterion 9: black-box transfer sanity at eps*.
Outcome criterion_transfer() {
  ensure_runs();
  const SeedRun& run = g_runs.front();
  const Classifier rep = make_prototype_classifier(run.rep_model, run.protos);
  const Classifier soft = make_softmax_classifier(run.soft_model);

  const AttackConfig atk = pgd20(Surrogate::SoftmaxXent, derive_seed(run.seed, "transfer"));
  const TransferResult tr = transfer_eval(soft, {rep, soft}, run.test_set, atk);

  const bool self_exact = tr.robust_acc[1] == tr.substitute_whitebox;
  const bool blackbox_ok = tr.robust_acc[0] >= run.rob_rep - 0.02;
  std::ostringstream ss;
  ss << "transfer-to-prototype " << format_double(tr.robust_acc[0]) << " vs white-box "
     << format_double(run.rob_rep) << "; self-transfer " << format_double(tr.robust_acc[1])
     << " == substitute white-box " << format_double(tr.substitute_whitebox)
     << (self_exact ? " (exact)" : " (MISMATCH)");
  return {self_exact && blackbox_ok, ss.str()};
}

// ---------------------------------------------------------------------------
// Criterion 10: CLI reruns with identical config + seed are byte-identical.
// ---------------------------------------------------------------------------
std::string find_cli() {
  if (const char* env = std::getenv("REPLAB_CLI")) return env;
  // fall back to the sibling build location when run outside ctest
  std::error_code ec;
  const fs::path self = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const fs::path guess = self.parent_path().parent_path() / "tools" / "replab";
    if (fs::exists(guess)) return guess.string();
  }
  return "";
}

Outcome criterion_cli_determinism() {
  const std::string cli = find_cli();
  if (cli.empty()) return {false, "REPLAB_CLI not set and no sibling binary found"};

  const fs::path base = fs::temp_directory_path() / "replab_acceptance_cli";
  fs::remove_all(base);
  fs::create_directories(base);
  const fs::path cfg_path = base / "exp.ini";
  {
    std::ofstream out(cfg_path);
    out << "[experiment]\nseed = 11\n[data]\nk = 4\nn_per_class = 50\ninput_dim = 6\n"
        << "[prototypes]\nD = 8\n[training]\nepochs = 6\n"
        << "[evaluation]\neps_list = 0,0.05,0.1\n";
  }
  const auto shell = [&](const std::string& args) {
    const std::string cmdline = cli + " " + args + " >/dev/null 2>&1";
    return std::system(cmdline.c_str());
  };

  std::vector<std::string> mismatch;
  const auto compare_twice = [&](const std::string& sub, const std::string& extra,
                                 const std::vector<std::string>& outputs) {
    std::string name = sub;
    for (char& c : name) {
      if (c == ' ') c = '_';
    }
    const fs::path d1 = base / (name + "_1");
    const fs::path d2 = base / (name + "_2");
    if (shell(sub + " --config " + cfg_path.string() + extra + " --out " + d1.string()) != 0 ||
        shell(sub + " --config " + cfg_path.string() + extra + " --out " + d2.string()) != 0) {
      mismatch.push_back(name + " (command failed)");
      return;
    }
    for (const std::string& f : outputs) {
      if (read_file(d1 / f) != read_file(d2 / f)) mismatch.push_back(name + "/" + f);
    }
  };

  compare_twice("protos gen", "", {"prototypes.csv", "prototype_stats.csv", "resolved.ini"});
  compare_twice("train", "", {"model.mlp", "history.csv", "prototypes.csv", "resolved.ini"});
  const std::string model_arg =
      " --override experiment.model_file=" + (base / "train_1" / "model.mlp").string();
  compare_twice("attack", model_arg, {"attack_summary.csv", "adversarial.csv"});
  compare_twice("curve", model_arg, {"curve.csv", "first_failure.csv", "curve.svg"});

  fs::remove_all(base);
  if (!mismatch.empty()) {
    std::string detail = "non-identical reruns:";
    for (const std::string& m : mismatch) detail += " " + m;
    return {false, detail};
  }
  return {true, "protos gen, train, attack and curve reruns byte-identical"};
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
  double time_limit_s;  // 0 = no limit stated
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "gradient oracle (finite differences, all loss modes)", criterion_gradient_oracle, 30},
      {2, "two-point repulsion closed form", criterion_closed_form, 1},
      {3, "repulsion trajectory vs numerical-gradient oracle", criterion_trajectory_oracle, 5},
      {4, "attack feasibility and fgsm/pgd identity", criterion_attack_feasibility, 0},
      {5, "robustness curve monotonicity", criterion_curve_monotone, 0},
      {6, "desk-scale method reproduction (prototype vs softmax)",
       criterion_method_reproduction, 600},
      {7, "curve slope: retention under doubled perturbation", criterion_curve_slope, 0},
      {8, "output-dimension sweep table", criterion_dimension_sweep, 0},
      {9, "black-box transfer sanity", criterion_transfer, 0},
      {10, "CLI determinism: byte-identical reruns", criterion_cli_determinism, 0},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const double t0 = now_s();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = now_s() - t0;
    bool pass = outcome.pass;
    std::string note = outcome.detail;
    if (pass && c.time_limit_s > 0 && elapsed > c.time_limit_s) {
      pass = false;
      note += " [exceeded " + format_double(c.time_limit_s) + "s limit]";
    }
    if (!pass) ++failures;
    std::printf("[%s] criterion %2d: %s — %s (%.2fs)\n", pass ? "PASS" : "FAIL", c.id,
                c.name.c_str(), note.c_str(), elapsed);
    std::fflush(stdout);
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures;
}
