#pragma once

#include <string>
#include <vector>

namespace replab {

using Vec = std::vector<double>;

/// Distance function selecting the shape of balls, projections and
/// classification regions: L2 gives hyper-spheres, Linf hyper-cubes.
enum class Metric { L2, Linf };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

/// d(a, b). Throws std::invalid_argument on dimension mismatch.
double distance(const Vec& a, const Vec& b, Metric m);

struct DistanceGradient {
  Vec grad;             // ∂ d(a,b) / ∂ a
  bool at_singularity;  // a == b: grad is the zero subgradient
};

/// Subgradient conventions: at a == b the gradient is the zero vector and
/// the singularity flag is set; Linf ties resolve to the lowest coordinate
/// index so optimization runs are deterministic.
DistanceGradient distance_gradient(const Vec& a, const Vec& b, Metric m);

/// Metric projection of x onto the closed eps-ball around center.
/// Linf clamps per coordinate, L2 rescales radially. Points already inside
/// are returned unchanged.
Vec project_ball(const Vec& x, const Vec& center, double eps, Metric m);

/// Per-coordinate clamp into [lo, hi]. Throws if lo > hi.
Vec clamp_domain(const Vec& x, double lo, double hi);

}  // namespace replab
