#pragma once

#include <span>
#include <vector>

namespace thzmec {

/// Solver-side safety margin (tasks/s) keeping relaxed iterates off the
/// queueing pole at lambda = s*mu.
inline constexpr double kStabilityMargin = 1e-6;

struct QueueParams {
  int computing_units = 2;        // s
  double unit_service_rate = 1.0; // mu, tasks/s

  double total_service_rate() const { return computing_units * unit_service_rate; }
};

/// Erlang C queueing probability for an M/M/s system at per-server
/// utilisation rho = lambda / (s*mu). Computed through the Erlang-B
/// recursion, which is overflow-free, and matches the direct factorial
/// formula to ~1e-15 relative.
double erlang_c(int servers, double rho);

/// Mean task operation delay C(s, lambda/(s*mu)) / (s*mu - lambda) + 1/mu.
double operation_delay(int servers, double mu, double lambda);

/// Tractable upper bound (lambda/(s*mu))^sqrt(s) / (s*mu - lambda) + 1/mu.
/// Requires servers >= 2.
double operation_delay_upper(int servers, double mu, double lambda);

/// d/dlambda of operation_delay_upper; used by the association solvers.
double operation_delay_upper_derivative(int servers, double mu, double lambda);

/// Per-MEC stability flags: load_j < s*mu - margin.
std::vector<bool> is_stable(std::span<const double> mec_loads, const QueueParams& queue,
                            double margin = kStabilityMargin);

}  // namespace thzmec
