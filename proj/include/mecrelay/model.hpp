#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mecrelay {

inline constexpr double kInfeasibleEnergy = std::numeric_limits<double>::infinity();

/// Relative slack applied when re-checking resource caps on a solver output.
inline constexpr double kCapTolerance = 1e-9;

// dBm/Hz <-> W/Hz. Only config parsing and report emission call these.
double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

/// Global radio constants, linear SI units throughout.
struct RadioParams {
  double bandwidth_max = 20e6;                 // Hz
  double power_max = 0.1;                      // W
  double noise_psd = 3.981071705534969e-21;   // W/Hz (-174 dBm/Hz)
  double background_interference_psd = 1e-18;  // W/Hz (-150 dBm/Hz)
  double carrier_freq = 2e9;                   // Hz

  /// sigma + I_b, the per-Hz floor every receiver sees.
  double noise_floor_psd() const { return noise_psd + background_interference_psd; }
};

struct TaskSpec {
  double data_bits = 1.25e6;
  double cycles_per_bit = 1750.0;
  double deadline = 0.6;      // s
  double server_speed = 4e10; // cycles/s

  /// Time spent computing at the MEC server, c*D/F_M.
  double compute_delay() const { return cycles_per_bit * data_bits / server_speed; }
  /// Time left for communication once the server's compute time is reserved.
  double comm_budget() const { return deadline - compute_delay(); }
};

/// Per-hop gains g_1..g_N (N = 1, 2 or 3) plus the two FD-Shared coupling gains.
///
/// self_interference_gain couples R2's own transmitter into its receiver;
/// cross_interference_gain couples R1's transmitter into the MEC receiver.
/// Both are ignored unless the chain has three hops. Zero means ideal isolation.
struct ChannelSet {
  std::vector<double> hop_gains;
  double self_interference_gain = 0.0;
  double cross_interference_gain = 0.0;

  static ChannelSet direct(double g);
  static ChannelSet two_hop(double g1, double g2);
  static ChannelSet three_hop(double g1, double g2, double g3, double g_self, double g_cross);

  std::size_t hop_count() const { return hop_gains.size(); }
};

enum class SchemeId { Local, Direct, TwoHopHD, ThreeHopUnopt, HDHD, HDFDO, HDFDS };

inline constexpr SchemeId kAllSchemes[] = {SchemeId::Local,         SchemeId::Direct,
                                           SchemeId::TwoHopHD,      SchemeId::ThreeHopUnopt,
                                           SchemeId::HDHD,          SchemeId::HDFDO,
                                           SchemeId::HDFDS};

/// Short CLI/CSV token ("local", "direct", "hd2", "unopt3", "hdhd", "hdfdo", "hdfds").
std::string_view scheme_token(SchemeId id);
std::optional<SchemeId> parse_scheme(std::string_view token);
/// True for every scheme that forwards through at least one relay.
bool is_relaying(SchemeId id);
/// Number of hops the scheme transmits over (0 for local computing).
std::size_t hop_count_of(SchemeId id);
/// Schemes whose relay R2 transmits while it receives (hop 2 and hop 3 share one slot).
bool is_full_duplex(SchemeId id);

struct Allocation {
  SchemeId scheme_id = SchemeId::Local;
  std::vector<double> time_slots;  // s, one per hop
  std::vector<double> powers;      // W
  std::vector<double> bandwidths;  // Hz
  double total_energy = kInfeasibleEnergy;
  bool feasible = false;
  double comm_delay = 0.0;         // s, transmission time only
  double processing_delay = 0.0;   // s, comm_delay plus compute (local: c*D/F_u)

  static Allocation infeasible(SchemeId id);
};

enum class ValidationErrorCode { NonPositiveField, DeadlineBelowComputeDelay };

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ValidationErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ValidationErrorCode code() const noexcept { return code_; }

 private:
  ValidationErrorCode code_;
};

/// A parameter set that passed validate(). Only validate() can build one.
class Scenario {
 public:
  const RadioParams& params() const { return params_; }
  const TaskSpec& task() const { return task_; }
  const ChannelSet& channels() const { return channels_; }
  double budget() const { return task_.comm_budget(); }

 private:
  friend Scenario validate(const RadioParams&, const TaskSpec&, const ChannelSet&);
  Scenario(RadioParams p, TaskSpec t, ChannelSet c)
      : params_(p), task_(t), channels_(std::move(c)) {}

  RadioParams params_;
  TaskSpec task_;
  ChannelSet channels_;
};

/// Throws ValidationError when a field is non-positive/non-finite, a gain leaves
/// (0, 1], or the deadline does not exceed the server compute delay.
Scenario validate(const RadioParams& params, const TaskSpec& task, const ChannelSet& channels);

/// Independent re-check of a returned Allocation against the scenario's caps.
/// Rates are recomputed from the stored powers, so the check does not reuse any
/// power-inversion formula. Returns a list of human-readable violations.
std::vector<std::string> audit_allocation(const Allocation& alloc, const Scenario& scenario);

}  // namespace mecrelay
