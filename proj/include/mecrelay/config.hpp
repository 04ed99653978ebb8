#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mecrelay/harness.hpp"
#include "mecrelay/scenario.hpp"

namespace mecrelay::scenario {
inline bool operator==(const RelayZone& a, const RelayZone& b) {
  return a.x_from == b.x_from && a.x_to == b.x_to && a.half_width == b.half_width;
}
inline bool operator==(const Range& a, const Range& b) { return a.lo == b.lo && a.hi == b.hi; }
inline bool operator==(const TaskRanges& a, const TaskRanges& b) {
  return a.data_bits == b.data_bits && a.cycles_per_bit == b.cycles_per_bit && a.ue_speed == b.ue_speed &&
         a.distance == b.distance && a.server_speed == b.server_speed;
}
inline bool operator==(const PathLossModel& a, const PathLossModel& b) {
  return a.model_id == b.model_id && a.bs_height == b.bs_height && a.min_distance_clamp == b.min_distance_clamp &&
         a.shadowing_sigma_db == b.shadowing_sigma_db;
}
}  // namespace mecrelay::scenario

namespace mecrelay::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Radio constants as written in config files: spectral densities in dBm/Hz,
/// power in mW. to_params() is the single place they become linear SI values.
struct RadioConfig {
  double bandwidth_max_hz = 20e6;
  double power_max_mw = 100.0;
  double noise_psd_dbm_hz = -174.0;
  double background_interference_dbm_hz = -150.0;
  double carrier_freq_hz = 2e9;

  RadioParams to_params() const;
  bool operator==(const RadioConfig&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t drops = 20000;
  unsigned workers = 0;
  std::vector<double> tmax_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<SchemeId> schemes{std::begin(kAllSchemes), std::end(kAllSchemes)};
  RadioConfig radio;
  scenario::TaskRanges task;
  std::array<scenario::RelayZone, 2> relay_zones{scenario::RelayZone{0.25, 0.5, 15.0},
                                                 scenario::RelayZone{0.5, 0.75, 15.0}};
  double min_node_distance_m = 1.0;
  scenario::PathLossModel path_loss;
  double si_cancellation_db = 110.0;
  harness::CommonSetPolicy common_set = harness::CommonSetPolicy::AllRelaying;
  std::string out_dir = "out";
  bool write_drops = false;
  bool oracle_mode = false;

  bool operator==(const RunConfig&) const = default;
};

/// Starts from the defaults and applies every key present. Unknown keys and
/// out-of-range values raise ConfigError naming the offending path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

std::vector<SchemeId> parse_scheme_list(const std::string& csv);
std::vector<double> parse_number_list(const std::string& csv);

harness::ExperimentConfig to_experiment(const RunConfig& cfg);
scenario::DropConfig to_drop_config(const RunConfig& cfg);

}  // namespace mecrelay::config


