#include "replab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "replab/io.hpp"

namespace replab {

double accuracy(const Classifier& clf, const Dataset& ds) {
  size_t correct = 0;
  for (size_t i = 0; i < ds.size(); ++i) {
    if (clf.predict(ds.inputs[i]) == ds.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

RobustEval robust_accuracy(const Classifier& clf, const Dataset& ds, const AttackConfig& cfg) {
  RobustEval ev;
  size_t nat_correct = 0, rob_correct = 0;
  for (size_t i = 0; i < ds.size(); ++i) {
    const int nat = clf.predict(ds.inputs[i]);
    const AdvResult res = pgd(clf, ds.inputs[i], ds.labels[i], cfg, i);
    const int raw_adv = clf.predict(res.x_adv);
    // The unperturbed input is feasible, so a naturally wrong prediction
    // stands even if the ascent wandered back into the correct region.
    const int counted = (nat != ds.labels[i]) ? nat : raw_adv;
    const bool robust = counted == ds.labels[i];
    if (nat == ds.labels[i]) ++nat_correct;
    if (robust) ++rob_correct;
    ev.natural_pred.push_back(nat);
    ev.adv_pred.push_back(counted);
    ev.robust.push_back(robust);
    ev.results.push_back(res);
  }
  ev.natural_acc = static_cast<double>(nat_correct) / static_cast<double>(ds.size());
  ev.robust_acc = static_cast<double>(rob_correct) / static_cast<double>(ds.size());
  return ev;
}

RobustnessCurve robustness_curve(const Classifier& clf, const Dataset& ds,
                                 const std::vector<double>& eps_values,
                                 const AttackConfig& base) {
  if (eps_values.empty()) throw std::invalid_argument("robustness_curve: empty eps list");
  for (size_t i = 1; i < eps_values.size(); ++i) {
    if (eps_values[i] < eps_values[i - 1]) {
      throw std::invalid_argument("robustness_curve: eps values must be ascending");
    }
  }

  RobustnessCurve curve;
  curve.eps_values = eps_values;
  curve.first_failure.assign(ds.size(), std::nullopt);

  std::vector<int> natural(ds.size());
  for (size_t i = 0; i < ds.size(); ++i) natural[i] = clf.predict(ds.inputs[i]);

  std::vector<bool> broken(ds.size(), false);
  std::vector<Vec> warm(ds.size());
  std::vector<bool> has_warm(ds.size(), false);

  for (const double eps : eps_values) {
    AttackConfig cfg = base;
    cfg.eps = eps;
    size_t rob = 0;
    for (size_t i = 0; i < ds.size(); ++i) {
      if (natural[i] != ds.labels[i] || broken[i]) {
        if (!curve.first_failure[i]) curve.first_failure[i] = eps;
        continue;
      }
      const AdvResult res = pgd(clf, ds.inputs[i], ds.labels[i], cfg, i,
                                has_warm[i] ? &warm[i] : nullptr);
      warm[i] = res.x_adv;
      has_warm[i] = true;
      if (res.success) {
        broken[i] = true;
        curve.first_failure[i] = eps;
      } else {
        ++rob;
      }
    }
    curve.robust_acc.push_back(static_cast<double>(rob) / static_cast<double>(ds.size()));
  }
  return curve;
}

std::string curve_to_csv(const RobustnessCurve& curve) {
  std::ostringstream out;
  out << "eps,robust_acc\n";
  for (size_t i = 0; i < curve.eps_values.size(); ++i) {
    out << format_double(curve.eps_values[i]) << "," << format_double(curve.robust_acc[i])
        << "\n";
  }
  return out.str();
}

std::string first_failure_to_csv(const RobustnessCurve& curve) {
  std::ostringstream out;
  out << "sample,first_failure_eps\n";
  for (size_t i = 0; i < curve.first_failure.size(); ++i) {
    out << i << ",";
    if (curve.first_failure[i]) out << format_double(*curve.first_failure[i]);
    out << "\n";
  }
  return out.str();
}

EnclosureStats enclosure_stats(const Mlp& model, const Dataset& ds, const PrototypeSet& protos) {
  if (ds.k > protos.k) {
    throw std::invalid_argument("enclosure_stats: dataset has more classes than prototypes");
  }
  EnclosureStats st;
  st.per_class.assign(protos.k, {});
  for (size_t i = 0; i < ds.size(); ++i) {
    const int y = ds.labels[i];
    const Vec out = forward(model, ds.inputs[i]);
    auto& pc = st.per_class[y];
    ++pc.count;
    const double own = distance(out, protos.centers[y], protos.metric);
    pc.mean_dist_own += own;
    if (own <= protos.eps) pc.own_ball_fraction += 1.0;
    for (int j = 0; j < protos.k; ++j) {
      if (j == y) continue;
      if (distance(out, protos.centers[j], protos.metric) < protos.eps) {
        pc.exclusion_violation_fraction += 1.0;
        break;
      }
    }
  }
  for (auto& pc : st.per_class) {
    if (pc.count > 0) {
      pc.own_ball_fraction /= pc.count;
      pc.exclusion_violation_fraction /= pc.count;
      pc.mean_dist_own /= pc.count;
    }
  }
  return st;
}

std::string enclosure_to_csv(const EnclosureStats& st) {
  std::ostringstream out;
  out << "class,count,own_ball_fraction,exclusion_violation_fraction,mean_dist_own\n";
  for (size_t c = 0; c < st.per_class.size(); ++c) {
    const auto& pc = st.per_class[c];
    out << c << "," << pc.count << "," << format_double(pc.own_ball_fraction) << ","
        << format_double(pc.exclusion_violation_fraction) << ","
        << format_double(pc.mean_dist_own) << "\n";
  }
  return out.str();
}

long long ConfusionMatrix::trace() const {
  long long t = 0;
  for (int i = 0; i < k; ++i) t += at(i, i);
  return t;
}

long long ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

ConfusionMatrix confusion_from_predictions(const std::vector<int>& labels,
                                           const std::vector<int>& predictions, int k,
                                           const std::string& source) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("confusion: labels/predictions length mismatch");
  }
  ConfusionMatrix cm;
  cm.k = k;
  cm.source = source;
  cm.counts.assign(static_cast<size_t>(k) * k, 0);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k || predictions[i] < 0 || predictions[i] >= k) {
      throw std::invalid_argument("confusion: class id out of range");
    }
    ++cm.at(labels[i], predictions[i]);
  }
  return cm;
}

ConfusionMatrix natural_confusion(const Classifier& clf, const Dataset& ds) {
  std::vector<int> preds(ds.size());
  for (size_t i = 0; i < ds.size(); ++i) preds[i] = clf.predict(ds.inputs[i]);
  return confusion_from_predictions(ds.labels, preds, clf.num_classes(), "natural");
}

ConfusionMatrix adv_confusion(const Classifier& clf, const Dataset& ds,
                              const AttackConfig& cfg) {
  const RobustEval ev = robust_accuracy(clf, ds, cfg);
  return confusion_from_predictions(ds.labels, ev.adv_pred, clf.num_classes(), "adversarial");
}

std::string confusion_to_csv(const ConfusionMatrix& cm, bool row_normalized) {
  std::ostringstream out;
  out << "true";
  for (int j = 0; j < cm.k; ++j) out << ",p" << j;
  out << "\n";
  for (int i = 0; i < cm.k; ++i) {
    out << i;
    long long row_sum = 0;
    for (int j = 0; j < cm.k; ++j) row_sum += cm.at(i, j);
    for (int j = 0; j < cm.k; ++j) {
      if (row_normalized) {
        const double v = row_sum ? static_cast<double>(cm.at(i, j)) / row_sum : 0.0;
        out << "," << format_double(v);
      } else {
        out << "," << cm.at(i, j);
      }
    }
    out << "\n";
  }
  return out.str();
}

namespace {

std::vector<int> top_m_offdiag(const ConfusionMatrix& cm, int row, int m) {
  std::vector<int> cols;
  for (int j = 0; j < cm.k; ++j) {
    if (j != row) cols.push_back(j);
  }
  std::stable_sort(cols.begin(), cols.end(), [&](int a, int b) {
    if (cm.at(row, a) != cm.at(row, b)) return cm.at(row, a) > cm.at(row, b);
    return a < b;
  });
  cols.resize(std::min<size_t>(cols.size(), static_cast<size_t>(m)));
  std::sort(cols.begin(), cols.end());
  return cols;
}

}  // namespace

double top_m_agreement(const ConfusionMatrix& a, const ConfusionMatrix& b, int m) {
  if (a.k != b.k) throw std::invalid_argument("top_m_agreement: class counts differ");
  if (m < 1) throw std::invalid_argument("top_m_agreement: m must be >= 1");
  int agree = 0;
  for (int i = 0; i < a.k; ++i) {
    if (top_m_offdiag(a, i, m) == top_m_offdiag(b, i, m)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(a.k);
}

OverlapStats misclass_overlap(const std::vector<bool>& robust_a,
                              const std::vector<bool>& robust_b) {
  if (robust_a.size() != robust_b.size()) {
    throw std::invalid_argument("misclass_overlap: sample index spaces differ");
  }
  OverlapStats st;
  size_t uni = 0;
  for (size_t i = 0; i < robust_a.size(); ++i) {
    const bool fa = !robust_a[i];
    const bool fb = !robust_b[i];
    if (fa) ++st.fail_a;
    if (fb) ++st.fail_b;
    if (fa && fb) ++st.common;
    if (fa || fb) ++uni;
  }
  if (uni == 0) {
    st.jaccard = 1.0;  // identical (empty) failure sets
  } else {
    st.jaccard = static_cast<double>(st.common) / static_cast<double>(uni);
  }
  const size_t mn = std::min(st.fail_a, st.fail_b);
  if (mn == 0) {
    st.over_min = (st.fail_a == 0 && st.fail_b == 0) ? 1.0 : 0.0;
  } else {
    st.over_min = static_cast<double>(st.common) / static_cast<double>(mn);
  }
  return st;
}

std::optional<size_t> nearest_in_predicted_class(const Classifier& clf, const Vec& sample,
                                                 int predicted_class, const Dataset& ds) {
  const Metric m = clf.rule == Rule::NearestPrototype ? clf.protos->metric : Metric::L2;
  const Vec repr = forward(*clf.model, sample);
  std::optional<size_t> best;
  double best_d = 0.0;
  for (size_t i = 0; i < ds.size(); ++i) {
    if (ds.labels[i] != predicted_class) continue;
    if (clf.predict(ds.inputs[i]) != ds.labels[i]) continue;  // pool: correctly classified
    const double d = distance(repr, forward(*clf.model, ds.inputs[i]), m);
    if (!best || d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

TransferResult transfer_eval(const Classifier& substitute, const std::vector<Classifier>& targets,
                             const Dataset& ds, const AttackConfig& cfg) {
  for (const Classifier& t : targets) {
    if (t.model->input_dim() != substitute.model->input_dim()) {
      throw std::invalid_argument("transfer_eval: target input dim differs from substitute");
    }
  }
  // Craft once on the substitute.
  const RobustEval sub = robust_accuracy(substitute, ds, cfg);
  TransferResult out;
  out.substitute_whitebox = sub.robust_acc;
  out.crafted.reserve(ds.size());
  for (const AdvResult& r : sub.results) out.crafted.push_back(r.x_adv);
  out.substitute_pred = sub.adv_pred;

  for (const Classifier& target : targets) {
    size_t nat_correct = 0, rob = 0;
    for (size_t i = 0; i < ds.size(); ++i) {
      const int nat = target.predict(ds.inputs[i]);
      if (nat != ds.labels[i]) continue;  // counted non-robust; natural input is feasible
      ++nat_correct;
      if (target.predict(out.crafted[i]) == ds.labels[i]) ++rob;
    }
    out.natural_acc.push_back(static_cast<double>(nat_correct) /
                              static_cast<double>(ds.size()));
    out.robust_acc.push_back(static_cast<double>(rob) / static_cast<double>(ds.size()));
  }
  return out;
}

}  // namespace replab
