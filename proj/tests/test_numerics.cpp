#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "thzmec/error.hpp"
#include "thzmec/numerics.hpp"
#include "thzmec/rng.hpp"

using namespace thzmec;

TEST_CASE("lambert w0 basics") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));

  // Independent Newton oracle on w e^w = 1.
  double w = 0.5;
  for (int k = 0; k < 60; ++k) {
    const double f = w * std::exp(w) - 1.0;
    w -= f / (std::exp(w) * (w + 1.0));
  }
  CHECK(w == doctest::Approx(0.567143).epsilon(1e-6));
  CHECK(lambert_w0(1.0) == doctest::Approx(w).epsilon(1e-13));

  CHECK_THROWS_AS(lambert_w0(-0.1), Error);
}

TEST_CASE("lambert w0 self-consistency over a log grid") {
  for (double x = 1e-8; x <= 1e6; x *= 3.7) {
    const double w = lambert_w0(x);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-10 * std::max(1.0, x));
  }
}

TEST_CASE("bisect") {
  int evals = 0;
  auto f = [&](double x) {
    ++evals;
    return x - 2.0;
  };
  const double root = bisect(f, 0.0, 10.0, 1e-9);
  CHECK(root == doctest::Approx(2.0).epsilon(1e-8));

  // Iteration bound: width-1 bracket at tol 1e-12 takes at most 41 halvings.
  evals = 0;
  bisect([&](double x) { ++evals; return x - 0.3; }, 0.0, 1.0, 1e-12);
  CHECK(evals <= 41 + 2);  // + the two bracket evaluations

  CHECK_THROWS_AS(bisect([](double x) { return x + 5.0; }, 0.0, 1.0, 1e-9), Error);
}

TEST_CASE("projection onto box and caps") {
  auto set = BoxSimplexFeasibleSet::box(3, 0.0, 1.0);
  BoxSimplexFeasibleSet::Group g;
  g.indices = {0, 1, 2};
  g.rhs = 1.0;
  set.add_group(std::move(g));

  std::vector<double> x{2.0, -1.0, 0.5};
  set.project(x);
  CHECK(set.contains(x, 1e-12));
  double sum = x[0] + x[1] + x[2];
  CHECK(sum <= 1.0 + 1e-12);

  // Idempotence is exact.
  std::vector<double> y = x;
  set.project(y);
  CHECK(y == x);

  // Interior points are untouched.
  std::vector<double> z{0.1, 0.2, 0.3};
  std::vector<double> z0 = z;
  set.project(z);
  CHECK(z == z0);
}

TEST_CASE("projection with weighted caps") {
  auto set = BoxSimplexFeasibleSet::box(2, 0.0, 10.0);
  BoxSimplexFeasibleSet::Group g;
  g.indices = {0, 1};
  g.weights = {1.0, 2.0};
  g.rhs = 2.0;
  set.add_group(std::move(g));

  std::vector<double> x{3.0, 3.0};
  set.project(x);
  CHECK(x[0] + 2.0 * x[1] <= 2.0 + 1e-9);
  // Projection onto {x + 2y = 2} from (3,3): theta = 7/5.
  CHECK(x[0] == doctest::Approx(3.0 - 1.4).epsilon(1e-8));
  CHECK(x[1] == doctest::Approx(3.0 - 2.8).epsilon(1e-8));
}

TEST_CASE("projection with sum-to-one equality") {
  auto set = BoxSimplexFeasibleSet::box(4, 0.0, 1.0);
  BoxSimplexFeasibleSet::Group g;
  g.indices = {0, 1, 2, 3};
  g.rhs = 1.0;
  g.equality = true;
  set.add_group(std::move(g));

  std::vector<double> x{0.0, 0.0, 0.0, 0.0};
  set.project(x);
  double sum = 0.0;
  for (double v : x) sum += v;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : x) CHECK(v == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("Dykstra handles intersecting families") {
  // 2 x 2 doubly stochastic projection.
  auto set = BoxSimplexFeasibleSet::box(4, 0.0, 1.0);
  // rows: {0,1}, {2,3}; cols: {0,2}, {1,3}
  for (int r = 0; r < 2; ++r) {
    BoxSimplexFeasibleSet::Group g;
    g.indices = {2 * r, 2 * r + 1};
    g.rhs = 1.0;
    g.equality = true;
    g.family = 0;
    set.add_group(std::move(g));
  }
  for (int c = 0; c < 2; ++c) {
    BoxSimplexFeasibleSet::Group g;
    g.indices = {c, c + 2};
    g.rhs = 1.0;
    g.equality = true;
    g.family = 1;
    set.add_group(std::move(g));
  }
  std::vector<double> x{0.9, 0.4, 0.1, 0.2};
  set.project(x);
  CHECK(x[0] + x[1] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(x[2] + x[3] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(x[0] + x[2] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(x[1] + x[3] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("projected gradient on quadratics") {
  // Interior minimiser is recovered.
  const std::vector<double> center{0.3, 0.6, 0.1};
  auto value = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - center[i]) * (x[i] - center[i]);
    return s;
  };
  auto gradient = [&](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * (x[i] - center[i]);
  };
  auto box = BoxSimplexFeasibleSet::box(3, 0.0, 1.0);
  PgOptions opts;
  opts.tol = 1e-10;
  opts.max_iter = 500;
  auto result = projected_gradient_min(value, gradient, box, {0.9, 0.1, 0.9}, opts);
  CHECK(result.converged);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(result.x[i] == doctest::Approx(center[i]).epsilon(1e-7));
  }

  // Exterior minimiser projects onto the box.
  const std::vector<double> outside{1.7, -0.4, 0.5};
  auto value2 = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - outside[i]) * (x[i] - outside[i]);
    return s;
  };
  auto gradient2 = [&](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * (x[i] - outside[i]);
  };
  auto result2 = projected_gradient_min(value2, gradient2, box, {0.5, 0.5, 0.5}, opts);
  CHECK(result2.x[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(result2.x[1] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(result2.x[2] == doctest::Approx(0.5).epsilon(1e-7));

  CHECK_THROWS_AS(projected_gradient_min(
                      [](std::span<const double>) {
                        return std::numeric_limits<double>::infinity();
                      },
                      gradient2, box, {0.5, 0.5, 0.5}, opts),
                  Error);
}

TEST_CASE("projected gradient objective sequence is non-increasing") {
  // Ill-conditioned quadratic with a cap; track every accepted objective.
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> scale(6), target(6);
    for (int i = 0; i < 6; ++i) {
      scale[i] = 0.5 + 10.0 * rng.next_double();
      target[i] = -0.5 + 2.0 * rng.next_double();
    }
    std::vector<double> trace;
    auto value = [&](std::span<const double> x) {
      double s = 0.0;
      for (int i = 0; i < 6; ++i) s += scale[i] * (x[i] - target[i]) * (x[i] - target[i]);
      return s;
    };
    auto gradient = [&](std::span<const double> x, std::span<double> g) {
      for (int i = 0; i < 6; ++i) g[i] = 2.0 * scale[i] * (x[i] - target[i]);
    };
    auto set = BoxSimplexFeasibleSet::box(6, 0.0, 1.0);
    BoxSimplexFeasibleSet::Group g;
    g.indices = {0, 1, 2, 3, 4, 5};
    g.rhs = 2.0;
    set.add_group(std::move(g));
    PgOptions opts;
    opts.max_iter = 120;
    auto wrapped = [&](std::span<const double> x) {
      const double v = value(x);
      trace.push_back(v);
      return v;
    };
    auto result = projected_gradient_min(wrapped, gradient, set,
                                         {0.9, 0.9, 0.9, 0.9, 0.9, 0.9}, opts);
    CHECK(std::isfinite(result.objective));
    // Accepted objectives only: the result objective is the minimum seen.
    double best = trace.front();
    for (double v : trace) best = std::min(best, v);
    CHECK(result.objective <= best + 1e-12);
  }
}

TEST_CASE("finite difference check on a quadratic") {
  auto value = [](std::span<const double> x) {
    return 3.0 * x[0] * x[0] + 0.5 * x[1] * x[1] + x[0] * x[1];
  };
  auto gradient = [](std::span<const double> x, std::span<double> g) {
    g[0] = 6.0 * x[0] + x[1];
    g[1] = x[1] + x[0];
  };
  const std::vector<double> x{0.7, -1.3};
  const auto result = finite_diff_check(value, gradient, x, 1e-5);
  CHECK(result.max_error <= 1e-7);
}
