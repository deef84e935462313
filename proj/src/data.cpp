#include "replab/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "replab/io.hpp"
#include "replab/rng.hpp"

namespace replab {

void Dataset::validate() const {
  if (inputs.size() != labels.size()) {
    throw std::invalid_argument("Dataset: inputs/labels length mismatch");
  }
  if (k < 1) throw std::invalid_argument("Dataset: k must be >= 1");
  if (inputs.empty()) throw std::invalid_argument("Dataset: empty");
  const size_t d = inputs[0].size();
  if (shape && shape->flat() != static_cast<int>(d)) {
    throw std::invalid_argument("Dataset: shape metadata disagrees with flat dimension");
  }
  std::vector<int> per_class(k, 0);
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != d) throw std::invalid_argument("Dataset: ragged inputs");
    for (const double v : inputs[i]) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument("Dataset: coordinate outside [0,1] in sample " +
                                    std::to_string(i));
      }
    }
    if (labels[i] < 0 || labels[i] >= k) {
      throw std::invalid_argument("Dataset: label out of range in sample " + std::to_string(i));
    }
    ++per_class[labels[i]];
  }
  for (int c = 0; c < k; ++c) {
    if (per_class[c] == 0) {
      throw std::invalid_argument("Dataset: class " + std::to_string(c) + " has no samples");
    }
  }
}

Dataset gen_gaussians(int k, int input_dim, double center_spread, double sigma, int n_per_class,
                      uint64_t seed) {
  if (k < 2) throw std::invalid_argument("gen_gaussians: k must be >= 2");
  if (input_dim < 1) throw std::invalid_argument("gen_gaussians: input_dim must be >= 1");
  if (sigma <= 0.0) throw std::invalid_argument("gen_gaussians: sigma must be > 0");
  if (n_per_class < 1) throw std::invalid_argument("gen_gaussians: n_per_class must be >= 1");
  if (center_spread <= 0.0 || center_spread > 5.0 / 3.0) {
    throw std::invalid_argument("gen_gaussians: center_spread must be in (0, 5/3]");
  }

  auto rng = make_rng(derive_seed(seed, "gaussians"));
  const double half = 0.3 * center_spread;
  std::uniform_real_distribution<double> ucenter(0.5 - half, 0.5 + half);
  std::vector<Vec> centers(k, Vec(input_dim));
  for (Vec& c : centers) {
    for (double& v : c) v = ucenter(rng);
  }

  std::normal_distribution<double> gauss(0.0, sigma);
  Dataset ds;
  ds.k = k;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      Vec x(input_dim);
      for (int j = 0; j < input_dim; ++j) {
        x[j] = std::clamp(centers[c][j] + gauss(rng), 0.0, 1.0);
      }
      ds.inputs.push_back(std::move(x));
      ds.labels.push_back(c);
    }
  }
  ds.validate();
  return ds;
}

Vec spiral_point(int k, int c, double t) {
  const double theta = 2.0 * std::numbers::pi * c / k + 3.0 * std::numbers::pi * t;
  const double rad = 0.05 + 0.40 * t;
  return {0.5 + rad * std::cos(theta), 0.5 + rad * std::sin(theta)};
}

Dataset gen_spirals(int k, int n_per_class, double noise, uint64_t seed) {
  if (k != 2 && k != 3) throw std::invalid_argument("gen_spirals: k must be 2 or 3");
  if (n_per_class < 2) throw std::invalid_argument("gen_spirals: n_per_class must be >= 2");
  if (noise < 0.0) throw std::invalid_argument("gen_spirals: noise must be >= 0");

  auto rng = make_rng(derive_seed(seed, "spirals"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.k = k;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      const double t = static_cast<double>(i) / (n_per_class - 1);
      Vec p = spiral_point(k, c, t);
      if (noise > 0.0) {
        p[0] += noise * gauss(rng);
        p[1] += noise * gauss(rng);
      }
      p[0] = std::clamp(p[0], 0.0, 1.0);
      p[1] = std::clamp(p[1], 0.0, 1.0);
      ds.inputs.push_back(std::move(p));
      ds.labels.push_back(c);
    }
  }
  ds.validate();
  return ds;
}

std::string dataset_to_csv(const Dataset& ds) {
  std::ostringstream out;
  if (ds.shape) {
    out << "# shape " << ds.shape->h << "," << ds.shape->w << "," << ds.shape->c << "\n";
  }
  out << "label";
  for (int j = 0; j < ds.dim(); ++j) out << ",x" << j;
  out << "\n";
  for (size_t i = 0; i < ds.size(); ++i) {
    out << ds.labels[i];
    for (const double v : ds.inputs[i]) out << "," << format_double(v);
    out << "\n";
  }
  return out.str();
}

LoadedDataset dataset_from_csv(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (const char ch : text) {
      if (ch == '\n') {
        if (!cur.empty() && cur.back() == '\r') cur.pop_back();
        lines.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) lines.push_back(cur);
  }
  LoadedDataset out;
  Dataset& ds = out.data;
  size_t row = 0;

  if (row < lines.size() && lines[row].rfind("# shape ", 0) == 0) {
    const auto fields = split_fields(lines[row].substr(8), ',');
    if (fields.size() != 3) {
      throw std::invalid_argument("dataset line 1: shape comment needs H,W,C");
    }
    ImageShape sh;
    sh.h = static_cast<int>(parse_int(fields[0], "dataset shape"));
    sh.w = static_cast<int>(parse_int(fields[1], "dataset shape"));
    sh.c = static_cast<int>(parse_int(fields[2], "dataset shape"));
    ds.shape = sh;
    ++row;
  }
  if (row >= lines.size()) throw std::invalid_argument("dataset: missing header row");
  const auto header = split_fields(lines[row], ',');
  if (header.empty() || header[0] != "label") {
    throw std::invalid_argument("dataset line " + std::to_string(row + 1) +
                                ": header must start with 'label'");
  }
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1) throw std::invalid_argument("dataset: no coordinate columns");
  ++row;

  int max_label = -1;
  for (; row < lines.size(); ++row) {
    const std::string& line = lines[row];
    if (line.empty()) continue;
    const std::string where = "dataset line " + std::to_string(row + 1);
    const auto fields = split_fields(line, ',');
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw std::invalid_argument(where + ": expected " + std::to_string(dim + 1) +
                                  " fields, got " + std::to_string(fields.size()));
    }
    const int label = static_cast<int>(parse_int(fields[0], where));
    if (label < 0) throw std::invalid_argument(where + ": negative label");
    Vec x(dim);
    for (int j = 0; j < dim; ++j) {
      x[j] = parse_double(fields[j + 1], where);
      if (!(x[j] >= 0.0 && x[j] <= 1.0)) {
        throw std::invalid_argument(where + ": coordinate " + format_double(x[j]) +
                                    " outside [0,1]");
      }
    }
    max_label = std::max(max_label, label);
    ds.inputs.push_back(std::move(x));
    ds.labels.push_back(label);
  }
  if (ds.inputs.empty()) throw std::invalid_argument("dataset: no data rows");
  ds.k = max_label + 1;
  std::vector<int> per_class(ds.k, 0);
  for (const int l : ds.labels) ++per_class[l];
  for (int c = 0; c < ds.k; ++c) {
    if (per_class[c] == 0) {
      out.warnings.push_back("class " + std::to_string(c) + " has no samples");
    }
  }
  if (ds.shape && ds.shape->flat() != dim) {
    throw std::invalid_argument("dataset: shape comment disagrees with column count");
  }
  return out;
}

void save_csv_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, dataset_to_csv(ds));
}

LoadedDataset load_csv_dataset(const std::filesystem::path& path) {
  return dataset_from_csv(read_file(path));
}

namespace {

int reflect_index(int i, int n) {
  // Reflect without repeating the edge sample: -1 -> 1, n -> n-2.
  if (i < 0) i = -i;
  if (i >= n) i = 2 * n - 2 - i;
  return i;
}

}  // namespace

Vec hflip(const Vec& x, const ImageShape& shape) {
  if (static_cast<int>(x.size()) != shape.flat()) {
    throw std::invalid_argument("hflip: sample does not match shape");
  }
  Vec out(x.size());
  for (int r = 0; r < shape.h; ++r) {
    for (int c = 0; c < shape.w; ++c) {
      for (int ch = 0; ch < shape.c; ++ch) {
        out[(static_cast<size_t>(r) * shape.w + c) * shape.c + ch] =
            x[(static_cast<size_t>(r) * shape.w + (shape.w - 1 - c)) * shape.c + ch];
      }
    }
  }
  return out;
}

Vec crop_shifted(const Vec& x, const ImageShape& shape, int dy, int dx, int pad) {
  if (static_cast<int>(x.size()) != shape.flat()) {
    throw std::invalid_argument("crop_shifted: sample does not match shape");
  }
  if (dy < 0 || dy > 2 * pad || dx < 0 || dx > 2 * pad) {
    throw std::invalid_argument("crop_shifted: offset outside [0, 2*pad]");
  }
  Vec out(x.size());
  for (int r = 0; r < shape.h; ++r) {
    const int src_r = reflect_index(r + dy - pad, shape.h);
    for (int c = 0; c < shape.w; ++c) {
      const int src_c = reflect_index(c + dx - pad, shape.w);
      for (int ch = 0; ch < shape.c; ++ch) {
        out[(static_cast<size_t>(r) * shape.w + c) * shape.c + ch] =
            x[(static_cast<size_t>(src_r) * shape.w + src_c) * shape.c + ch];
      }
    }
  }
  return out;
}

AugmentResult augment(const Vec& x, const std::optional<ImageShape>& shape,
                      std::mt19937_64& rng) {
  if (!shape) return {x, false};
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> offset(0, 4);
  Vec out = x;
  if (coin(rng) == 1) out = hflip(out, *shape);
  const int dy = offset(rng);
  const int dx = offset(rng);
  out = crop_shifted(out, *shape, dy, dx, 2);
  return {std::move(out), true};
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_fraction, uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split: train_fraction must be in (0,1)");
  }
  ds.validate();
  std::vector<std::vector<size_t>> by_class(ds.k);
  for (size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

  Dataset train, test;
  train.k = test.k = ds.k;
  train.shape = test.shape = ds.shape;
  auto rng = make_rng(derive_seed(seed, "split"));
  for (int c = 0; c < ds.k; ++c) {
    auto& idx = by_class[c];
    std::shuffle(idx.begin(), idx.end(), rng);
    long long n_train = std::llround(train_fraction * static_cast<double>(idx.size()));
    if (idx.size() >= 2) {
      n_train = std::clamp<long long>(n_train, 1, static_cast<long long>(idx.size()) - 1);
    } else {
      n_train = 1;  // lone sample goes to train
    }
    for (size_t i = 0; i < idx.size(); ++i) {
      Dataset& dst = (static_cast<long long>(i) < n_train) ? train : test;
      dst.inputs.push_back(ds.inputs[idx[i]]);
      dst.labels.push_back(ds.labels[idx[i]]);
    }
  }
  return {std::move(train), std::move(test)};
}

}  // namespace replab
