#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "replab/geometry.hpp"

namespace replab {

struct ImageShape {
  int h = 0;
  int w = 0;
  int c = 0;
  int flat() const { return h * w * c; }
};

/// Labeled samples with coordinates in [0,1]. `shape` is set for image-like
/// data stored flattened row-major.
struct Dataset {
  std::vector<Vec> inputs;
  std::vector<int> labels;
  int k = 0;
  std::optional<ImageShape> shape;

  size_t size() const { return inputs.size(); }
  int dim() const { return inputs.empty() ? 0 : static_cast<int>(inputs[0].size()); }

  /// Structural invariants: lengths, ranges, label bounds, one sample per
  /// class. Throws std::invalid_argument on violation.
  void validate() const;
};

/// Seeded Gaussian blobs: class centers uniform in the box
/// [0.5 - 0.3*spread, 0.5 + 0.3*spread]^dim, samples clamped to [0,1].
Dataset gen_gaussians(int k, int input_dim, double center_spread, double sigma, int n_per_class,
                      uint64_t seed);

/// Interleaved spirals in [0,1]^2 for k in {2,3}. With noise = 0 the points
/// lie exactly on the parametric curves.
Dataset gen_spirals(int k, int n_per_class, double noise, uint64_t seed);

/// Point on the noiseless spiral for class c at parameter t in [0,1].
Vec spiral_point(int k, int c, double t);

struct LoadedDataset {
  Dataset data;
  std::vector<std::string> warnings;  // e.g. classes with no samples
};

/// CSV with header `label,x0,x1,...`; image-like data carries a
/// `# shape H,W,C` comment line before the header. Errors carry line numbers.
LoadedDataset load_csv_dataset(const std::filesystem::path& path);
void save_csv_dataset(const Dataset& ds, const std::filesystem::path& path);
std::string dataset_to_csv(const Dataset& ds);
LoadedDataset dataset_from_csv(const std::string& text);

/// Horizontal flip of a flattened H x W x C image.
Vec hflip(const Vec& x, const ImageShape& shape);

/// Reflect-pad by `pad` pixels then crop back to H x W at offset (dy, dx),
/// both in [0, 2*pad]. The centered offset (pad, pad) is the identity.
Vec crop_shifted(const Vec& x, const ImageShape& shape, int dy, int dx, int pad = 2);

struct AugmentResult {
  Vec x;
  bool applied = false;  // false for flat data (no-op)
};

/// Training-time augmentation: flip with probability 1/2, then a random
/// shifted crop. Flat data passes through unchanged.
AugmentResult augment(const Vec& x, const std::optional<ImageShape>& shape, std::mt19937_64& rng);

/// Stratified, seeded, disjoint and exhaustive split.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, uint64_t seed);

}  // namespace replab
