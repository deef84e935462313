#include "replab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replab {

namespace {

void require_same_dim(const Vec& a, const Vec& b, const char* op) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
}

}  // namespace

std::string metric_name(Metric m) { return m == Metric::L2 ? "L2" : "Linf"; }

Metric metric_from_name(const std::string& name) {
  if (name == "L2" || name == "l2") return Metric::L2;
  if (name == "Linf" || name == "linf") return Metric::Linf;
  throw std::invalid_argument("unknown metric: " + name);
}

double distance(const Vec& a, const Vec& b, Metric m) {
  require_same_dim(a, b, "distance");
  if (m == Metric::L2) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sum += d * d;
    }
    return std::sqrt(sum);
  }
  double best = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    best = std::max(best, std::abs(a[i] - b[i]));
  }
  return best;
}

DistanceGradient distance_gradient(const Vec& a, const Vec& b, Metric m) {
  require_same_dim(a, b, "distance_gradient");
  DistanceGradient out{Vec(a.size(), 0.0), false};
  if (m == Metric::L2) {
    const double d = distance(a, b, Metric::L2);
    if (d == 0.0) {
      out.at_singularity = true;
      return out;
    }
    for (size_t i = 0; i < a.size(); ++i) out.grad[i] = (a[i] - b[i]) / d;
    return out;
  }
  // Linf: signed indicator at the maximal |a_i - b_i|, lowest index on ties.
  size_t arg = 0;
  double best = -1.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double v = std::abs(a[i] - b[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  if (best == 0.0) {
    out.at_singularity = true;
    return out;
  }
  out.grad[arg] = (a[arg] - b[arg]) > 0.0 ? 1.0 : -1.0;
  return out;
}

Vec project_ball(const Vec& x, const Vec& center, double eps, Metric m) {
  require_same_dim(x, center, "project_ball");
  if (eps < 0.0) throw std::invalid_argument("project_ball: eps must be >= 0");
  Vec out = x;
  if (m == Metric::Linf) {
    for (size_t i = 0; i < x.size(); ++i) {
      out[i] = std::clamp(x[i], center[i] - eps, center[i] + eps);
    }
    return out;
  }
  const double d = distance(x, center, Metric::L2);
  if (d <= eps) return out;
  const double scale = eps / d;
  for (size_t i = 0; i < x.size(); ++i) {
    out[i] = center[i] + (x[i] - center[i]) * scale;
  }
  return out;
}

Vec clamp_domain(const Vec& x, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp_domain: lo > hi");
  Vec out = x;
  for (double& v : out) v = std::clamp(v, lo, hi);
  return out;
}

}  // namespace replab
