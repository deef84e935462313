#include "replab/prototypes.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "replab/io.hpp"
#include "replab/rng.hpp"

namespace replab {

void PrototypeSet::validate() const {
  if (k < 2) throw std::invalid_argument("PrototypeSet: k must be >= 2");
  if (dim < 1) throw std::invalid_argument("PrototypeSet: D must be >= 1");
  if (static_cast<int>(centers.size()) != k) {
    throw std::invalid_argument("PrototypeSet: expected " + std::to_string(k) + " centers, got " +
                                std::to_string(centers.size()));
  }
  for (const Vec& c : centers) {
    if (static_cast<int>(c.size()) != dim) {
      throw std::invalid_argument("PrototypeSet: center dimension mismatch");
    }
    for (const double v : c) {
      if (!std::isfinite(v)) throw std::invalid_argument("PrototypeSet: non-finite coordinate");
    }
  }
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      if (distance(centers[i], centers[j], metric) <= 0.0) {
        throw std::invalid_argument("PrototypeSet: coincident centers " + std::to_string(i) +
                                    " and " + std::to_string(j));
      }
    }
  }
}

std::vector<Vec> init_prototypes(int k, int dim, uint64_t seed) {
  if (k < 2) throw std::invalid_argument("init_prototypes: k must be >= 2");
  if (dim < 1) throw std::invalid_argument("init_prototypes: D must be >= 1");
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec> centers(k, Vec(dim));
  for (Vec& c : centers) {
    for (double& v : c) v = gauss(rng);
  }
  return centers;
}

double repulsion_objective(const std::vector<Vec>& centers, double r, Metric m) {
  if (centers.size() < 2) {
    throw std::invalid_argument("repulsion_objective: need at least 2 centers");
  }
  double sum = 0.0;
  for (size_t i = 0; i < centers.size(); ++i) {
    for (size_t j = i + 1; j < centers.size(); ++j) {
      sum += distance(centers[i], centers[j], m);
    }
  }
  return -r * sum;
}

PrototypeSet optimize_prototypes(std::vector<Vec> centers, const OptimizeOptions& opts) {
  if (centers.size() < 2) {
    throw std::invalid_argument("optimize_prototypes: need at least 2 centers");
  }
  if (opts.mu <= 0.0) throw std::invalid_argument("optimize_prototypes: mu must be > 0");
  if (opts.epochs < 0) throw std::invalid_argument("optimize_prototypes: epochs must be >= 0");
  if (opts.r <= 0.0) throw std::invalid_argument("optimize_prototypes: r must be > 0");

  const size_t k = centers.size();
  const size_t dim = centers[0].size();
  for (const Vec& c : centers) {
    if (c.size() != dim) throw std::invalid_argument("optimize_prototypes: ragged centers");
  }

  std::vector<Vec> grads(k, Vec(dim));
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    for (Vec& g : grads) std::fill(g.begin(), g.end(), 0.0);
    // Objective gradient w.r.t. c_i: -r * sum_{j != i} grad d(c_i, c_j).
    // Each unordered pair contributes antisymmetrically to both centers.
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = i + 1; j < k; ++j) {
        const DistanceGradient dg = distance_gradient(centers[i], centers[j], opts.metric);
        for (size_t c = 0; c < dim; ++c) {
          grads[i][c] -= opts.r * dg.grad[c];
          grads[j][c] += opts.r * dg.grad[c];
        }
      }
    }
    for (size_t i = 0; i < k; ++i) {
      for (size_t c = 0; c < dim; ++c) {
        if (!std::isfinite(grads[i][c])) {
          throw std::runtime_error("optimize_prototypes: non-finite gradient at epoch " +
                                   std::to_string(epoch) + ", center " + std::to_string(i));
        }
        centers[i][c] -= opts.mu * grads[i][c];
      }
      if (opts.bound) {
        centers[i] = project_ball(centers[i], Vec(dim, 0.0), *opts.bound, Metric::L2);
      }
    }
    if (opts.on_epoch) opts.on_epoch(epoch, centers);
  }

  PrototypeSet set;
  set.k = static_cast<int>(k);
  set.dim = static_cast<int>(dim);
  set.metric = opts.metric;
  set.centers = std::move(centers);
  set.eps = opts.eps;
  set.r = opts.r;
  set.epochs_run = opts.epochs;
  set.validate();
  return set;
}

SeparationStats separation_stats(const PrototypeSet& set) {
  set.validate();
  SeparationStats st;
  st.min_pairwise = std::numeric_limits<double>::infinity();
  st.max_pairwise = 0.0;
  double sum = 0.0;
  int pairs = 0;
  for (int i = 0; i < set.k; ++i) {
    for (int j = i + 1; j < set.k; ++j) {
      const double d = distance(set.centers[i], set.centers[j], set.metric);
      st.min_pairwise = std::min(st.min_pairwise, d);
      st.max_pairwise = std::max(st.max_pairwise, d);
      sum += d;
      ++pairs;
    }
  }
  st.mean_pairwise = sum / pairs;
  st.objective_value = repulsion_objective(set.centers, set.r, set.metric);
  st.ratio_min_to_2eps = set.eps > 0.0 ? st.min_pairwise / (2.0 * set.eps)
                                       : std::numeric_limits<double>::infinity();
  return st;
}

std::string prototypes_to_csv(const PrototypeSet& set) {
  std::ostringstream out;
  out << set.k << "," << set.dim << "," << metric_name(set.metric) << ","
      << format_double(set.eps) << "," << format_double(set.r) << "," << set.epochs_run << "\n";
  for (const Vec& c : set.centers) {
    for (size_t i = 0; i < c.size(); ++i) {
      if (i) out << ",";
      out << format_double(c[i]);
    }
    out << "\n";
  }
  return out.str();
}

PrototypeSet prototypes_from_csv(const std::string& text) {
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
  if (lines.empty()) throw std::invalid_argument("prototype file: empty");

  const auto head = split_fields(lines[0], ',');
  if (head.size() != 6) {
    throw std::invalid_argument("prototype file line 1: expected 6 header fields, got " +
                                std::to_string(head.size()));
  }
  PrototypeSet set;
  set.k = static_cast<int>(parse_int(head[0], "prototype file line 1 (k)"));
  set.dim = static_cast<int>(parse_int(head[1], "prototype file line 1 (D)"));
  set.metric = metric_from_name(head[2]);
  set.eps = parse_double(head[3], "prototype file line 1 (eps)");
  set.r = parse_double(head[4], "prototype file line 1 (r)");
  set.epochs_run = static_cast<int>(parse_int(head[5], "prototype file line 1 (epochs)"));

  if (static_cast<int>(lines.size()) - 1 != set.k) {
    throw std::invalid_argument("prototype file: header k=" + std::to_string(set.k) +
                                " disagrees with " + std::to_string(lines.size() - 1) +
                                " body lines");
  }
  for (int i = 0; i < set.k; ++i) {
    const std::string& line = lines[i + 1];
    const auto fields = split_fields(line, ',');
    const std::string where = "prototype file line " + std::to_string(i + 2);
    if (static_cast<int>(fields.size()) != set.dim) {
      throw std::invalid_argument(where + ": expected " + std::to_string(set.dim) +
                                  " columns, got " + std::to_string(fields.size()));
    }
    Vec c(set.dim);
    for (int j = 0; j < set.dim; ++j) c[j] = parse_double(fields[j], where);
    set.centers.push_back(std::move(c));
  }
  set.validate();
  return set;
}

void save_prototypes(const PrototypeSet& set, const std::filesystem::path& path) {
  set.validate();
  write_file_atomic(path, prototypes_to_csv(set));
}

PrototypeSet load_prototypes(const std::filesystem::path& path) {
  return prototypes_from_csv(read_file(path));
}

}  // namespace replab
