#pragma once

#include <functional>
#include <span>
#include <vector>

namespace thzmec {

/// Principal-branch Lambert W on x >= 0, solved by Halley iteration to
/// ~1e-15 relative self-consistency.
double lambert_w0(double x);

/// Bisection on a bracketing interval; f(lo) and f(hi) must differ in sign.
/// Stops when the bracket width drops below tol and returns its midpoint.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Box bounds plus optional linear group constraints (weighted sum caps or
/// sum equalities). Groups are organised in families; groups within a family
/// must not share coordinates. Projection onto a single family is exact;
/// with several families Dykstra's alternating scheme is used.
class BoxSimplexFeasibleSet {
 public:
  struct Group {
    std::vector<int> indices;
    std::vector<double> weights;  // empty means all-ones
    double rhs = 1.0;
    bool equality = false;  // false: sum <= rhs, true: sum == rhs
    int family = 0;
  };

  BoxSimplexFeasibleSet(std::vector<double> lower, std::vector<double> upper);
  static BoxSimplexFeasibleSet box(std::size_t n, double lo, double hi);

  void add_group(Group group);
  std::size_t dimension() const { return lower_.size(); }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  void project(std::vector<double>& x) const;
  std::vector<double> projected(std::vector<double> x) const;
  bool contains(std::span<const double> x, double tol = 1e-9) const;

 private:
  void project_family(std::vector<double>& x, int family) const;
  bool contains_for_projection(std::span<const double> x) const;
  std::vector<double> lower_, upper_;
  std::vector<Group> groups_;
  int num_families_ = 0;
};

struct PgOptions {
  double tol = 1e-8;            // sup-norm of x - P(x - g)
  int max_iter = 300;
  double initial_step = 1.0;
  double armijo_sigma = 1e-4;
  double backtrack_beta = 0.5;
  int max_backtracks = 60;
};

struct PgResult {
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Projected gradient descent with Armijo backtracking. The objective may
/// return +inf outside its domain; such trial points are rejected by the
/// line search. The accepted objective sequence is non-increasing.
PgResult projected_gradient_min(
    const std::function<double(std::span<const double>)>& objective,
    const std::function<void(std::span<const double>, std::span<double>)>& gradient,
    const BoxSimplexFeasibleSet& feasible, std::vector<double> x0, const PgOptions& opts = {});

struct GradientCheckResult {
  std::vector<double> per_coordinate_error;  // |fd_i - g_i| / max(1, ||g||_inf)
  double max_error = 0.0;
};

/// Central-difference check of an analytic gradient at x. The step per
/// coordinate is h * (1 + |x_i|); x must be interior to the objective's
/// domain by at least that much.
GradientCheckResult finite_diff_check(
    const std::function<double(std::span<const double>)>& objective,
    const std::function<void(std::span<const double>, std::span<double>)>& gradient,
    std::span<const double> x, double h = 1e-6);

}  // namespace thzmec
