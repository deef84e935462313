#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "replab/geometry.hpp"

namespace replab {

/// k class centers in D-dimensional output space, pre-optimized for large
/// mutual separation, together with the metric and the ball radius they were
/// built for.
struct PrototypeSet {
  int k = 0;
  int dim = 0;
  Metric metric = Metric::L2;
  std::vector<Vec> centers;
  double eps = 0.0;    // d(.)-ball radius around each center
  double r = 1.0;      // repulsive degree used during optimization
  int epochs_run = 0;

  /// Throws std::invalid_argument if any structural invariant is broken
  /// (center count/dims, finiteness, k >= 2, coincident centers).
  void validate() const;
};

struct SeparationStats {
  double min_pairwise = 0.0;
  double mean_pairwise = 0.0;
  double max_pairwise = 0.0;
  double objective_value = 0.0;
  double ratio_min_to_2eps = 0.0;  // min_pairwise / (2 * eps)
};

/// Seeded i.i.d. standard-normal centers; deterministic for a fixed seed.
std::vector<Vec> init_prototypes(int k, int dim, uint64_t seed);

/// -r * sum over unordered pairs (i < j) of d(c_i, c_j). The radius term of
/// the underlying objective is constant for a fixed radius and omitted.
double repulsion_objective(const std::vector<Vec>& centers, double r, Metric m);

struct OptimizeOptions {
  double r = 1.0;
  double mu = 0.01;
  int epochs = 100;
  Metric metric = Metric::L2;
  /// When set, every center is projected back into the L2 ball of this
  /// radius around the origin after each step.
  std::optional<double> bound;
  double eps = 1.0;  // recorded into the resulting set
  /// Test/diagnostic hook, called after every epoch with the epoch index
  /// (1-based) and the current centers.
  std::function<void(int, const std::vector<Vec>&)> on_epoch;
};

/// Full-batch gradient descent on repulsion_objective for exactly
/// opts.epochs steps with learning rate opts.mu.
PrototypeSet optimize_prototypes(std::vector<Vec> centers, const OptimizeOptions& opts);

SeparationStats separation_stats(const PrototypeSet& set);

/// Textual CSV round-trip. Line 1 carries k,D,metric,eps,r,epochs; then k
/// lines of D comma-separated full-precision coordinates.
void save_prototypes(const PrototypeSet& set, const std::filesystem::path& path);
PrototypeSet load_prototypes(const std::filesystem::path& path);

std::string prototypes_to_csv(const PrototypeSet& set);
PrototypeSet prototypes_from_csv(const std::string& text);

}  // namespace replab
