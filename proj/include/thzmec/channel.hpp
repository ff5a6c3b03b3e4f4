#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace thzmec {

class NetworkScenario;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

struct BlockageParams {
  double blocker_height = 1.7;     // h_b, m
  double blocker_radius = 0.3;     // tau_b, m
  double blocker_density = 0.2;    // beta_b, per m^2
  double mec_height = 3.0;         // h_MEC, m
  double iot_height = 0.3;         // h_IoT, m

  /// zeta = exp(-2 beta tau^2), the d = 0 intercept.
  double zeta() const;
  /// delta_b = 2 beta tau (h_b - h_IoT) / (h_MEC - h_IoT), per meter.
  double delta_b() const;
};

/// Molecular absorption coefficient K(f) as a piecewise-linear lookup over
/// strictly increasing frequencies. Queries outside the tabulated range are
/// an error; silent extrapolation of an exponential loss term is not safe.
class AbsorptionTable {
 public:
  static AbsorptionTable from_samples(std::vector<std::pair<double, double>> samples,
                                      std::string origin = "<memory>");
  static AbsorptionTable from_csv_text(const std::string& text,
                                       std::string origin = "<memory>");
  static AbsorptionTable from_csv_file(const std::string& path);
  /// Flat K(f) = k over all frequencies, for tests and controlled studies.
  static AbsorptionTable constant(double k_per_m);
  /// Built-in table with representative transmission-window values,
  /// 0.10 THz .. 1.10 THz. Identical to data/absorption_default.csv.
  static std::shared_ptr<const AbsorptionTable> bundled_default();

  double k_at(double frequency_hz) const;
  double min_frequency() const { return freq_.front(); }
  double max_frequency() const { return freq_.back(); }
  std::size_t size() const { return freq_.size(); }
  const std::vector<double>& frequencies() const { return freq_; }
  const std::vector<double>& coefficients() const { return k_; }

 private:
  AbsorptionTable() = default;
  std::vector<double> freq_;  // Hz, strictly increasing
  std::vector<double> k_;     // per meter, >= 0
  std::string origin_;
};

/// The three directional link types of the pair set C.
enum class LinkKind {
  iot_to_mec,  // ground direct path, blockage-prone
  iot_to_uav,  // aerial uplink hop
  uav_to_mec,  // aerial downlink hop
};

/// Center frequency of 1-based sub-band u: f_o + (u - 1/2) B.
double subband_center_frequency(int u, double f_o, double bandwidth, int num_subbands);

/// Free-space-plus-absorption power gain (s_light / (4 pi f d))^2 exp(-K d).
double channel_gain(double distance_m, double frequency_hz, double k_per_m);

/// Probability that a ground-level LoS link is not blocked: zeta exp(-delta_b d).
double non_blockage_probability(double distance_m, const BlockageParams& blockage);

/// Long-term throughput of a link in bits/s. The non-blockage factor applies
/// only to iot_to_mec links; u is 1-based.
double long_term_rate(LinkKind kind, double distance_m, double power_w, int u,
                      const NetworkScenario& scenario);

/// Per-scenario cache of sub-band constants used by the delay evaluators.
struct LinkBudget {
  explicit LinkBudget(const NetworkScenario& scenario);

  double bandwidth;      // B
  double noise_power;    // B * N0
  double zeta;
  double delta_b;
  std::vector<double> subband_frequency;  // [u0], 0-based
  std::vector<double> subband_k;          // K(f_u)
  std::vector<double> free_space_const;   // (c / (4 pi f_u))^2

  double gain(double distance, int u0) const;
  double snr(double distance, double power, int u0) const;
  double rate_aerial(double distance, double power, int u0) const;
  double rate_direct(double distance, double power, int u0) const;
  double non_blockage(double distance) const;
};

}  // namespace thzmec
