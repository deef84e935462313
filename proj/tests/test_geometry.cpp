#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "replab/geometry.hpp"
#include "test_util.hpp"

using namespace replab;
using testutil::numeric_grad;
using testutil::random_vec;

TEST_CASE("distance: known values") {
  CHECK(distance({0, 0}, {3, 4}, Metric::L2) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(distance({1, 2}, {4, 0}, Metric::Linf) == doctest::Approx(3.0).epsilon(1e-12));
  const Vec a{0.3, -1.7, 2.2};
  CHECK(distance(a, a, Metric::L2) == 0.0);
  CHECK(distance(a, a, Metric::Linf) == 0.0);
}

TEST_CASE("distance: dimension mismatch rejected") {
  CHECK_THROWS_AS(distance({1, 2}, {1, 2, 3}, Metric::L2), std::invalid_argument);
  CHECK_THROWS_AS(project_ball({1, 2}, {1}, 1.0, Metric::L2), std::invalid_argument);
}

TEST_CASE("distance: metric axioms on random triples") {
  std::mt19937_64 rng(7);
  for (const Metric m : {Metric::L2, Metric::Linf}) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vec a = random_vec(rng, 4, -5, 5);
      const Vec b = random_vec(rng, 4, -5, 5);
      const Vec c = random_vec(rng, 4, -5, 5);
      const double dab = distance(a, b, m);
      const double dba = distance(b, a, m);
      const double dac = distance(a, c, m);
      const double dcb = distance(c, b, m);
      CHECK(dab >= 0.0);
      CHECK(dab == doctest::Approx(dba).epsilon(1e-15));
      CHECK(dab <= dac + dcb + 1e-12);
      CHECK(distance(a, a, m) == 0.0);
    }
  }
}

TEST_CASE("distance_gradient: hand values") {
  const auto g2 = distance_gradient({3, 4}, {0, 0}, Metric::L2);
  CHECK_FALSE(g2.at_singularity);
  CHECK(g2.grad[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(g2.grad[1] == doctest::Approx(0.8).epsilon(1e-12));

  // max |difference| is |1-4| = 3 at index 0, negative sign; finite
  // differences agree: d((1 +- h, 2), (4, 0)) = 3 -+ h.
  const auto gi = distance_gradient({1, 2}, {4, 0}, Metric::Linf);
  CHECK_FALSE(gi.at_singularity);
  CHECK(gi.grad[0] == -1.0);
  CHECK(gi.grad[1] == 0.0);

  const auto gp = distance_gradient({1, 2}, {0, 0}, Metric::Linf);
  CHECK(gp.grad[0] == 0.0);
  CHECK(gp.grad[1] == 1.0);
}

TEST_CASE("distance_gradient: singularity flagged, zero subgradient") {
  const Vec a{1.5, -2.0};
  for (const Metric m : {Metric::L2, Metric::Linf}) {
    const auto g = distance_gradient(a, a, m);
    CHECK(g.at_singularity);
    CHECK(g.grad == Vec{0.0, 0.0});
  }
}

TEST_CASE("distance_gradient: Linf ties break to lowest index") {
  const auto g = distance_gradient({1, -1}, {0, 0}, Metric::Linf);
  CHECK(g.grad[0] == 1.0);
  CHECK(g.grad[1] == 0.0);
}

TEST_CASE("distance_gradient: matches finite differences on random pairs") {
  std::mt19937_64 rng(11);
  const double h = 1e-6;
  for (const Metric m : {Metric::L2, Metric::Linf}) {
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const Vec a = random_vec(rng, 5, -2, 2);
      const Vec b = random_vec(rng, 5, -2, 2);
      if (m == Metric::Linf) {
        // Skip near-ties where the max coordinate flips inside the FD stencil.
        double top = 0.0, second = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
          const double v = std::abs(a[i] - b[i]);
          if (v > top) {
            second = top;
            top = v;
          } else if (v > second) {
            second = v;
          }
        }
        if (top - second < 10 * h) continue;
      }
      const auto analytic = distance_gradient(a, b, m);
      const Vec fd = numeric_grad([&](const Vec& p) { return distance(p, b, m); }, a, h);
      for (size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(analytic.grad[i] - fd[i]) <=
              1e-6 * std::max({std::abs(fd[i]), std::abs(analytic.grad[i]), 1.0}));
      }
      ++checked;
    }
    CHECK(checked >= 90);
  }
}

TEST_CASE("project_ball: interior point unchanged") {
  const Vec x{0.1, 0.2};
  CHECK(project_ball(x, {0, 0}, 1.0, Metric::L2) == x);
  CHECK(project_ball(x, {0, 0}, 1.0, Metric::Linf) == x);
}

TEST_CASE("project_ball: hand values") {
  const Vec p2 = project_ball({6, 8}, {0, 0}, 5.0, Metric::L2);
  CHECK(p2[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(p2[1] == doctest::Approx(4.0).epsilon(1e-12));

  const Vec pi = project_ball({2, 0}, {0, 0}, 1.0, Metric::Linf);
  CHECK(pi == Vec{1.0, 0.0});
}

TEST_CASE("project_ball: idempotent, never increases distance, respects radius") {
  std::mt19937_64 rng(13);
  for (const Metric m : {Metric::L2, Metric::Linf}) {
    for (int trial = 0; trial < 500; ++trial) {
      const Vec x = random_vec(rng, 6, -3, 3);
      const Vec c = random_vec(rng, 6, -3, 3);
      std::uniform_real_distribution<double> ur(0.0, 2.0);
      const double eps = ur(rng);
      const Vec p = project_ball(x, c, eps, m);
      CHECK(distance(p, c, m) <= eps + 1e-9);
      CHECK(distance(p, c, m) <= distance(x, c, m) + 1e-12);
      const Vec pp = project_ball(p, c, eps, m);
      for (size_t i = 0; i < p.size(); ++i) CHECK(pp[i] == doctest::Approx(p[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("clamp_domain: hand values and idempotency") {
  CHECK(clamp_domain({-0.1, 0.5, 1.3}, 0.0, 1.0) == Vec{0.0, 0.5, 1.0});
  const Vec in{0.25, 0.75};
  CHECK(clamp_domain(in, 0.0, 1.0) == in);
  const Vec once = clamp_domain({-5, 0.3, 9}, 0.0, 1.0);
  CHECK(clamp_domain(once, 0.0, 1.0) == once);
  CHECK_THROWS_AS(clamp_domain({1.0}, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("metric names round-trip") {
  CHECK(metric_from_name(metric_name(Metric::L2)) == Metric::L2);
  CHECK(metric_from_name(metric_name(Metric::Linf)) == Metric::Linf);
  CHECK_THROWS_AS(metric_from_name("L7"), std::invalid_argument);
}
