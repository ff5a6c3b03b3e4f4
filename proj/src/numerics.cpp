#include "thzmec/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "thzmec/error.hpp"

namespace thzmec {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double lambert_w0(double x) {
  require(std::isfinite(x), ErrorCode::domain, "lambert_w0: x must be finite");
  require(x >= 0.0, ErrorCode::domain, "lambert_w0: negative branch not supported");
  if (x == 0.0) return 0.0;

  double w;
  if (x < std::exp(1.0)) {
    w = x / (1.0 + x);  // crude but inside the Halley basin
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int iter = 0; iter < 64; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= 1e-15 * std::max(1.0, x)) break;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    const double step = f / denom;
    w -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(w))) break;
  }
  return w;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  require(lo < hi, ErrorCode::invalid_argument, "bisect: lo must be < hi");
  require(tol > 0.0, ErrorCode::invalid_argument, "bisect: tol must be positive");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  require(std::signbit(flo) != std::signbit(fhi), ErrorCode::invalid_argument,
          "bisect: f(lo) and f(hi) must have opposite signs");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (std::signbit(fm) == std::signbit(flo)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

BoxSimplexFeasibleSet::BoxSimplexFeasibleSet(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  require(lower_.size() == upper_.size(), ErrorCode::invalid_argument,
          "feasible set: bound vectors must have equal length");
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    require(lower_[i] <= upper_[i], ErrorCode::invalid_argument,
            "feasible set: lower bound exceeds upper bound at index " + std::to_string(i));
  }
}

BoxSimplexFeasibleSet BoxSimplexFeasibleSet::box(std::size_t n, double lo, double hi) {
  return BoxSimplexFeasibleSet(std::vector<double>(n, lo), std::vector<double>(n, hi));
}

void BoxSimplexFeasibleSet::add_group(Group group) {
  require(!group.indices.empty(), ErrorCode::invalid_argument,
          "feasible set: group must reference at least one coordinate");
  if (!group.weights.empty()) {
    require(group.weights.size() == group.indices.size(), ErrorCode::invalid_argument,
            "feasible set: group weights must match its indices");
    for (double w : group.weights) {
      require(w > 0.0, ErrorCode::invalid_argument,
              "feasible set: group weights must be positive");
    }
  }
  for (int idx : group.indices) {
    require(idx >= 0 && idx < static_cast<int>(lower_.size()), ErrorCode::invalid_argument,
            "feasible set: group index out of range");
  }
  num_families_ = std::max(num_families_, group.family + 1);
  groups_.push_back(std::move(group));
}

namespace {

// Exact projection of one group's coordinates onto
// { lo <= x <= hi, sum w x (= or <=) rhs }. The KKT solution is
// y_i = clamp(x_i - theta w_i) with a scalar theta, applied to the raw
// (possibly out-of-box) input; clamping first would lose the direction.
void project_group(std::vector<double>& x, const BoxSimplexFeasibleSet::Group& g,
                   const std::vector<double>& lower, const std::vector<double>& upper) {
  const std::size_t n = g.indices.size();
  const bool unit = g.weights.empty();

  auto weight = [&](std::size_t t) { return unit ? 1.0 : g.weights[t]; };

  // S(theta) = sum w clamp(x - theta w) is non-increasing in theta.
  auto shifted_sum = [&](double theta) {
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const int i = g.indices[t];
      const double w = weight(t);
      s += w * std::clamp(x[i] - theta * w, lower[i], upper[i]);
    }
    return s;
  };

  const double clamped_sum = shifted_sum(0.0);
  const double scale = std::max(1.0, std::abs(g.rhs));
  const bool satisfied = g.equality ? std::abs(clamped_sum - g.rhs) <= 1e-12 * scale
                                    : clamped_sum <= g.rhs + 1e-12 * scale;
  if (satisfied) {
    for (std::size_t t = 0; t < n; ++t) {
      const int i = g.indices[t];
      x[i] = std::clamp(x[i], lower[i], upper[i]);
    }
    return;
  }

  double t_lo = 0.0, t_hi = 0.0;
  if (g.equality && clamped_sum < g.rhs) {
    t_hi = 0.0;
    t_lo = -1.0;
    while (shifted_sum(t_lo) < g.rhs) {
      t_lo *= 2.0;
      if (t_lo < -1e18) break;
    }
  } else {
    t_lo = 0.0;
    t_hi = 1.0;
    while (shifted_sum(t_hi) > g.rhs) {
      t_hi *= 2.0;
      if (t_hi > 1e18) break;
    }
  }
  for (int iter = 0; iter < 100; ++iter) {
    const double mid = 0.5 * (t_lo + t_hi);
    if (shifted_sum(mid) > g.rhs) {
      t_lo = mid;
    } else {
      t_hi = mid;
    }
  }
  const double theta = 0.5 * (t_lo + t_hi);
  for (std::size_t t = 0; t < n; ++t) {
    const int i = g.indices[t];
    const double w = weight(t);
    x[i] = std::clamp(x[i] - theta * w, lower[i], upper[i]);
  }
}

}  // namespace

void BoxSimplexFeasibleSet::project_family(std::vector<double>& x, int family) const {
  std::vector<bool> covered(x.size(), false);
  for (const auto& g : groups_) {
    if (g.family != family) continue;
    for (int i : g.indices) covered[i] = true;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!covered[i]) x[i] = std::clamp(x[i], lower_[i], upper_[i]);
  }
  for (const auto& g : groups_) {
    if (g.family == family) project_group(x, g, lower_, upper_);
  }
}

bool BoxSimplexFeasibleSet::contains_for_projection(std::span<const double> x) const {
  // Box bounds exactly (so a projected point re-projects to itself bit for
  // bit), group sums within the theta-search resolution.
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower_[i] || x[i] > upper_[i]) return false;
  }
  for (const auto& g : groups_) {
    double sum = 0.0;
    for (std::size_t t = 0; t < g.indices.size(); ++t) {
      sum += (g.weights.empty() ? 1.0 : g.weights[t]) * x[g.indices[t]];
    }
    const double scale = std::max(1.0, std::abs(g.rhs));
    if (sum > g.rhs + 1e-12 * scale) return false;
    if (g.equality && sum < g.rhs - 1e-12 * scale) return false;
  }
  return true;
}

void BoxSimplexFeasibleSet::project(std::vector<double>& x) const {
  require(x.size() == lower_.size(), ErrorCode::invalid_argument,
          "feasible set: point dimension mismatch");
  if (contains_for_projection(x)) return;  // keeps projection exactly idempotent
  if (num_families_ <= 1) {
    project_family(x, 0);
    return;
  }
  // Dykstra's alternating projections over the constraint families.
  std::vector<std::vector<double>> increments(num_families_,
                                              std::vector<double>(x.size(), 0.0));
  std::vector<double> work(x.size());
  for (int sweep = 0; sweep < 300; ++sweep) {
    double change = 0.0;
    for (int f = 0; f < num_families_; ++f) {
      for (std::size_t i = 0; i < x.size(); ++i) work[i] = x[i] + increments[f][i];
      std::vector<double> projected = work;
      project_family(projected, f);
      for (std::size_t i = 0; i < x.size(); ++i) {
        increments[f][i] = work[i] - projected[i];
        change = std::max(change, std::abs(projected[i] - x[i]));
        x[i] = projected[i];
      }
    }
    if (change <= 1e-12) break;
  }
}

std::vector<double> BoxSimplexFeasibleSet::projected(std::vector<double> x) const {
  project(x);
  return x;
}

bool BoxSimplexFeasibleSet::contains(std::span<const double> x, double tol) const {
  if (x.size() != lower_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  }
  for (const auto& g : groups_) {
    double sum = 0.0;
    for (std::size_t t = 0; t < g.indices.size(); ++t) {
      sum += (g.weights.empty() ? 1.0 : g.weights[t]) * x[g.indices[t]];
    }
    const double scale = std::max(1.0, std::abs(g.rhs));
    if (sum > g.rhs + tol * scale) return false;
    if (g.equality && sum < g.rhs - tol * scale) return false;
  }
  return true;
}

PgResult projected_gradient_min(
    const std::function<double(std::span<const double>)>& objective,
    const std::function<void(std::span<const double>, std::span<double>)>& gradient,
    const BoxSimplexFeasibleSet& feasible, std::vector<double> x0, const PgOptions& opts) {
  feasible.project(x0);
  PgResult result;
  result.x = std::move(x0);
  double fx = objective(result.x);
  require(std::isfinite(fx), ErrorCode::invalid_argument,
          "projected_gradient_min: objective is not finite at the start point");

  const std::size_t n = result.x.size();
  std::vector<double> grad(n), trial(n), reference(n);
  double step = opts.initial_step;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    result.iterations = iter + 1;
    gradient(result.x, grad);

    // Stationarity: fixed unit-step projected gradient displacement.
    for (std::size_t i = 0; i < n; ++i) reference[i] = result.x[i] - grad[i];
    feasible.project(reference);
    double pg_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pg_norm = std::max(pg_norm, std::abs(reference[i] - result.x[i]));
    }
    if (pg_norm <= opts.tol) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = result.x[i] - step * grad[i];
      feasible.project(trial);
      double descent = 0.0;
      for (std::size_t i = 0; i < n; ++i) descent += grad[i] * (trial[i] - result.x[i]);
      const double ft = objective(trial);
      if (std::isfinite(ft) && ft <= fx + opts.armijo_sigma * descent) {
        result.x.swap(trial);
        fx = ft;
        accepted = true;
        step *= 2.0;  // cheap recovery after over-shrinking
        break;
      }
      step *= opts.backtrack_beta;
    }
    if (!accepted) break;  // no acceptable step at floating-point scale
  }
  result.objective = fx;
  return result;
}

GradientCheckResult finite_diff_check(
    const std::function<double(std::span<const double>)>& objective,
    const std::function<void(std::span<const double>, std::span<double>)>& gradient,
    std::span<const double> x, double h) {
  const std::size_t n = x.size();
  std::vector<double> grad(n);
  std::vector<double> point(x.begin(), x.end());
  gradient(point, grad);
  double gnorm = 0.0;
  for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
  const double denom = std::max(1.0, gnorm);

  GradientCheckResult result;
  result.per_coordinate_error.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double hi = h * (1.0 + std::abs(point[i]));
    const double saved = point[i];
    point[i] = saved + hi;
    const double fp = objective(point);
    point[i] = saved - hi;
    const double fm = objective(point);
    point[i] = saved;
    const double fd = (fp - fm) / (2.0 * hi);
    const double err = std::abs(fd - grad[i]) / denom;
    result.per_coordinate_error[i] = err;
    result.max_error = std::max(result.max_error, err);
  }
  return result;
}

}  // namespace thzmec
