#pragma once

#include <optional>
#include <string>
#include <vector>

#include "replab/attacks.hpp"
#include "replab/data.hpp"
#include "replab/model.hpp"

namespace replab {

/// Fraction of correct predictions under the classifier's rule.
double accuracy(const Classifier& clf, const Dataset& ds);

/// Per-sample robustness bookkeeping. A sample is robust iff its natural
/// prediction is correct AND the attack fails to flip it; since the
/// unperturbed input is always a feasible adversarial candidate, the counted
/// adversarial prediction for a naturally misclassified sample is its natural
/// prediction.
struct RobustEval {
  double natural_acc = 0.0;
  double robust_acc = 0.0;
  std::vector<int> natural_pred;
  std::vector<int> adv_pred;     // counted adversarial prediction per sample
  std::vector<bool> robust;
  std::vector<AdvResult> results;
};

RobustEval robust_accuracy(const Classifier& clf, const Dataset& ds, const AttackConfig& cfg);

struct RobustnessCurve {
  std::vector<double> eps_values;
  std::vector<double> robust_acc;
  std::vector<std::optional<double>> first_failure;  // per sample, smallest failing eps
};

/// Cumulative sweep over ascending eps values: an example broken at a smaller
/// eps stays broken at every larger one (feasible by ball nesting), and PGD
/// warm-starts from the previous best point, so the curve is monotone
/// non-increasing by construction. A step_size <= 0 in `base` rescales per
/// eps. Curve point at eps = 0 equals natural accuracy exactly.
RobustnessCurve robustness_curve(const Classifier& clf, const Dataset& ds,
                                 const std::vector<double>& eps_values,
                                 const AttackConfig& base);

std::string curve_to_csv(const RobustnessCurve& curve);
std::string first_failure_to_csv(const RobustnessCurve& curve);

/// Empirical check of the per-class ball constraints the prototypes were
/// built for: containment in the own-class ball and exclusion from the
/// others, measured on model outputs.
struct EnclosureStats {
  struct PerClass {
    double own_ball_fraction = 0.0;
    double exclusion_violation_fraction = 0.0;
    double mean_dist_own = 0.0;
    int count = 0;
  };
  std::vector<PerClass> per_class;
};

EnclosureStats enclosure_stats(const Mlp& model, const Dataset& ds, const PrototypeSet& protos);
std::string enclosure_to_csv(const EnclosureStats& st);

struct ConfusionMatrix {
  int k = 0;
  std::vector<long long> counts;  // row-major, rows = true class
  std::string source;             // "natural" or "adversarial"

  long long at(int t, int p) const { return counts[static_cast<size_t>(t) * k + p]; }
  long long& at(int t, int p) { return counts[static_cast<size_t>(t) * k + p]; }
  long long trace() const;
  long long total() const;
};

ConfusionMatrix natural_confusion(const Classifier& clf, const Dataset& ds);
ConfusionMatrix adv_confusion(const Classifier& clf, const Dataset& ds, const AttackConfig& cfg);
ConfusionMatrix confusion_from_predictions(const std::vector<int>& labels,
                                           const std::vector<int>& predictions, int k,
                                           const std::string& source);

std::string confusion_to_csv(const ConfusionMatrix& cm, bool row_normalized);

/// Fraction of true classes whose sets of m largest off-diagonal targets
/// coincide between the two matrices (ties resolve to the lowest index).
double top_m_agreement(const ConfusionMatrix& a, const ConfusionMatrix& b, int m);

/// Overlap between the two non-robust sample sets. Both the Jaccard ratio and
/// the |intersection| / min(|A|,|B|) variant are reported.
struct OverlapStats {
  double jaccard = 0.0;
  double over_min = 0.0;
  size_t fail_a = 0;
  size_t fail_b = 0;
  size_t common = 0;
};

OverlapStats misclass_overlap(const std::vector<bool>& robust_a,
                              const std::vector<bool>& robust_b);

/// Among correctly classified samples of the (wrong) predicted class, the one
/// whose representation f(x) is nearest to the misclassified sample's
/// representation. Empty pool yields nullopt.
std::optional<size_t> nearest_in_predicted_class(const Classifier& clf, const Vec& sample,
                                                 int predicted_class, const Dataset& ds);

/// Black-box transferability: adversarial examples are crafted once against
/// the substitute, targets are only queried for predictions.
struct TransferResult {
  std::vector<double> natural_acc;  // per target
  std::vector<double> robust_acc;   // per target, on the transferred batch
  double substitute_whitebox = 0.0;
  std::vector<Vec> crafted;
  std::vector<int> substitute_pred;  // substitute's predictions on crafted
};

TransferResult transfer_eval(const Classifier& substitute, const std::vector<Classifier>& targets,
                             const Dataset& ds, const AttackConfig& cfg);

}  // namespace replab
