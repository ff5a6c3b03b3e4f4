#include "thzmec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "thzmec/error.hpp"
#include "thzmec/scenario.hpp"

namespace thzmec {

double BlockageParams::zeta() const {
  return std::exp(-2.0 * blocker_density * blocker_radius * blocker_radius);
}

double BlockageParams::delta_b() const {
  if (blocker_density * blocker_radius == 0.0) return 0.0;
  require(mec_height != iot_height, ErrorCode::domain,
          "blockage: h_MEC == h_IoT makes the blocker geometry degenerate");
  return 2.0 * blocker_density * blocker_radius * (blocker_height - iot_height) /
         (mec_height - iot_height);
}

AbsorptionTable AbsorptionTable::from_samples(std::vector<std::pair<double, double>> samples,
                                              std::string origin) {
  require(!samples.empty(), ErrorCode::parse, "absorption table '" + origin + "' is empty");
  AbsorptionTable t;
  t.origin_ = std::move(origin);
  t.freq_.reserve(samples.size());
  t.k_.reserve(samples.size());
  double prev = -1.0;
  for (const auto& [f, k] : samples) {
    require(f > 0.0, ErrorCode::parse,
            "absorption table '" + t.origin_ + "': frequencies must be positive");
    require(f > prev, ErrorCode::parse,
            "absorption table '" + t.origin_ + "': frequencies must be strictly increasing");
    require(k >= 0.0, ErrorCode::parse,
            "absorption table '" + t.origin_ + "': coefficients must be non-negative");
    t.freq_.push_back(f);
    t.k_.push_back(k);
    prev = f;
  }
  return t;
}

AbsorptionTable AbsorptionTable::from_csv_text(const std::string& text, std::string origin) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::parse,
          "absorption table '" + origin + "': empty file");
  // Tolerate trailing \r from CRLF files.
  auto strip = [](std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
    return s;
  };
  require(strip(line) == "frequency_hz,k_per_m", ErrorCode::parse,
          "absorption table '" + origin + "': expected header 'frequency_hz,k_per_m'");
  std::vector<std::pair<double, double>> samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, ErrorCode::parse,
            "absorption table '" + origin + "': line " + std::to_string(line_no) +
                " is not 'frequency,k'");
    try {
      std::size_t used = 0;
      const double f = std::stod(line.substr(0, comma), &used);
      const double k = std::stod(line.substr(comma + 1), &used);
      samples.emplace_back(f, k);
    } catch (const std::exception&) {
      fail(ErrorCode::parse, "absorption table '" + origin + "': line " +
                                 std::to_string(line_no) + " has a malformed number");
    }
  }
  return from_samples(std::move(samples), std::move(origin));
}

AbsorptionTable AbsorptionTable::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open absorption table '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv_text(buf.str(), path);
}

AbsorptionTable AbsorptionTable::constant(double k_per_m) {
  require(k_per_m >= 0.0, ErrorCode::invalid_argument,
          "constant absorption coefficient must be non-negative");
  return from_samples({{1.0, k_per_m}, {1e16, k_per_m}}, "<constant>");
}

namespace {

// Representative transmission-window values, 0.10..1.10 THz in 20 GHz steps.
// Smooth by construction; the real coefficient comes from spectroscopic
// databases and is supplied by the user as a CSV sidecar.
constexpr double kDefaultTableFreqStep = 0.02e12;
constexpr double kDefaultTableFreqLo = 0.10e12;
constexpr int kDefaultTableSize = 51;

double default_table_k(double f_hz) {
  const double x = f_hz / 0.34e12;
  return 5e-4 + 2.5e-3 * std::pow(x, 2.2);
}

}  // namespace

std::shared_ptr<const AbsorptionTable> AbsorptionTable::bundled_default() {
  static const std::shared_ptr<const AbsorptionTable> table = [] {
    std::vector<std::pair<double, double>> samples;
    samples.reserve(kDefaultTableSize);
    for (int i = 0; i < kDefaultTableSize; ++i) {
      const double f = kDefaultTableFreqLo + i * kDefaultTableFreqStep;
      samples.emplace_back(f, default_table_k(f));
    }
    return std::make_shared<const AbsorptionTable>(
        from_samples(std::move(samples), "<bundled-default>"));
  }();
  return table;
}

double AbsorptionTable::k_at(double frequency_hz) const {
  require(frequency_hz >= freq_.front() && frequency_hz <= freq_.back(), ErrorCode::domain,
          "absorption table '" + origin_ + "' does not cover " +
              std::to_string(frequency_hz) + " Hz (range " + std::to_string(freq_.front()) +
              " .. " + std::to_string(freq_.back()) + ")");
  const auto it = std::lower_bound(freq_.begin(), freq_.end(), frequency_hz);
  const std::size_t hi = static_cast<std::size_t>(it - freq_.begin());
  if (hi == 0) return k_.front();
  const std::size_t lo = hi - 1;
  if (freq_[hi] == frequency_hz) return k_[hi];
  const double t = (frequency_hz - freq_[lo]) / (freq_[hi] - freq_[lo]);
  return k_[lo] + t * (k_[hi] - k_[lo]);
}

double subband_center_frequency(int u, double f_o, double bandwidth, int num_subbands) {
  require(u >= 1 && u <= num_subbands, ErrorCode::invalid_argument,
          "sub-band index " + std::to_string(u) + " outside [1, " +
              std::to_string(num_subbands) + "]");
  require(f_o > 0.0 && bandwidth > 0.0, ErrorCode::invalid_argument,
          "sub-band frequency needs f_o > 0 and B > 0");
  return f_o + (u - 0.5) * bandwidth;
}

double channel_gain(double distance_m, double frequency_hz, double k_per_m) {
  require(distance_m > 0.0, ErrorCode::domain, "channel_gain: distance must be positive");
  require(frequency_hz > 0.0, ErrorCode::domain, "channel_gain: frequency must be positive");
  const double fs = kSpeedOfLight / (4.0 * M_PI * frequency_hz * distance_m);
  return fs * fs * std::exp(-k_per_m * distance_m);
}

double non_blockage_probability(double distance_m, const BlockageParams& blockage) {
  require(distance_m >= 0.0, ErrorCode::domain,
          "non_blockage_probability: distance must be non-negative");
  return blockage.zeta() * std::exp(-blockage.delta_b() * distance_m);
}

double long_term_rate(LinkKind kind, double distance_m, double power_w, int u,
                      const NetworkScenario& scenario) {
  require(power_w >= 0.0, ErrorCode::invalid_argument, "long_term_rate: power must be >= 0");
  if (power_w == 0.0) return 0.0;
  const double b = scenario.subband_bandwidth();
  const double f = subband_center_frequency(u, scenario.base_frequency(), b,
                                            scenario.num_subbands());
  const double gain = channel_gain(distance_m, f, scenario.absorption().k_at(f));
  const double snr = power_w * gain / (b * scenario.noise_density());
  double rate = b * std::log2(1.0 + snr);
  if (kind == LinkKind::iot_to_mec) {
    rate *= non_blockage_probability(distance_m, scenario.blockage());
  }
  return rate;
}

LinkBudget::LinkBudget(const NetworkScenario& scenario)
    : bandwidth(scenario.subband_bandwidth()),
      noise_power(scenario.subband_bandwidth() * scenario.noise_density()),
      zeta(scenario.blockage().zeta()),
      delta_b(scenario.blockage().delta_b()) {
  const int num_u = scenario.num_subbands();
  subband_frequency.resize(num_u);
  subband_k.resize(num_u);
  free_space_const.resize(num_u);
  for (int u0 = 0; u0 < num_u; ++u0) {
    const double f = subband_center_frequency(u0 + 1, scenario.base_frequency(), bandwidth, num_u);
    subband_frequency[u0] = f;
    subband_k[u0] = scenario.absorption().k_at(f);
    const double fs = kSpeedOfLight / (4.0 * M_PI * f);
    free_space_const[u0] = fs * fs;
  }
}

double LinkBudget::gain(double distance, int u0) const {
  return free_space_const[u0] * std::exp(-subband_k[u0] * distance) / (distance * distance);
}

double LinkBudget::snr(double distance, double power, int u0) const {
  return power * gain(distance, u0) / noise_power;
}

double LinkBudget::rate_aerial(double distance, double power, int u0) const {
  if (power <= 0.0) return 0.0;
  return bandwidth * std::log2(1.0 + snr(distance, power, u0));
}

double LinkBudget::rate_direct(double distance, double power, int u0) const {
  return non_blockage(distance) * rate_aerial(distance, power, u0);
}

double LinkBudget::non_blockage(double distance) const {
  return zeta * std::exp(-delta_b * distance);
}

}  // namespace thzmec
