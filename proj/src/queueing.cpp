#include "thzmec/queueing.hpp"

#include <cmath>
#include <string>

#include "thzmec/error.hpp"

namespace thzmec {

double erlang_c(int servers, double rho) {
  require(servers >= 1, ErrorCode::invalid_argument, "erlang_c: servers must be >= 1");
  require(rho >= 0.0, ErrorCode::invalid_argument, "erlang_c: rho must be non-negative");
  require(rho < 1.0, ErrorCode::infeasible,
          "erlang_c: rho >= 1 means an unstable queue (rho=" + std::to_string(rho) + ")");
  if (rho == 0.0) return 0.0;

  // Erlang-B recursion on the offered load a = s*rho, then convert to C.
  const double a = servers * rho;
  double b = 1.0;
  for (int k = 1; k <= servers; ++k) {
    b = a * b / (k + a * b);
  }
  return servers * b / (servers - a * (1.0 - b));
}

double operation_delay(int servers, double mu, double lambda) {
  require(servers >= 1, ErrorCode::invalid_argument, "operation_delay: servers must be >= 1");
  require(mu > 0.0, ErrorCode::invalid_argument, "operation_delay: mu must be positive");
  require(lambda >= 0.0, ErrorCode::invalid_argument, "operation_delay: lambda must be non-negative");
  const double capacity = servers * mu;
  require(lambda < capacity, ErrorCode::infeasible,
          "operation_delay: lambda >= s*mu, queue unstable");
  const double c = erlang_c(servers, lambda / capacity);
  return c / (capacity - lambda) + 1.0 / mu;
}

double operation_delay_upper(int servers, double mu, double lambda) {
  require(servers >= 2, ErrorCode::invalid_argument,
          "operation_delay_upper: the bound requires servers >= 2");
  require(mu > 0.0, ErrorCode::invalid_argument, "operation_delay_upper: mu must be positive");
  require(lambda >= 0.0, ErrorCode::invalid_argument,
          "operation_delay_upper: lambda must be non-negative");
  const double capacity = servers * mu;
  require(lambda < capacity, ErrorCode::infeasible,
          "operation_delay_upper: lambda >= s*mu, queue unstable");
  const double rho = lambda / capacity;
  return std::pow(rho, std::sqrt(static_cast<double>(servers))) / (capacity - lambda) + 1.0 / mu;
}

double operation_delay_upper_derivative(int servers, double mu, double lambda) {
  require(servers >= 2, ErrorCode::invalid_argument,
          "operation_delay_upper_derivative: the bound requires servers >= 2");
  const double cap = servers * mu;
  require(lambda >= 0.0 && lambda < cap, ErrorCode::infeasible,
          "operation_delay_upper_derivative: lambda outside [0, s*mu)");
  const double sq = std::sqrt(static_cast<double>(servers));
  const double rho_pow = std::pow(lambda / cap, sq);
  const double head = lambda > 0.0 ? sq * std::pow(lambda, sq - 1.0) / std::pow(cap, sq) : 0.0;
  return head / (cap - lambda) + rho_pow / ((cap - lambda) * (cap - lambda));
}

std::vector<bool> is_stable(std::span<const double> mec_loads, const QueueParams& queue,
                            double margin) {
  const double cap = queue.total_service_rate() - margin;
  std::vector<bool> out(mec_loads.size());
  for (std::size_t j = 0; j < mec_loads.size(); ++j) {
    out[j] = mec_loads[j] < cap;
  }
  return out;
}

}  // namespace thzmec
