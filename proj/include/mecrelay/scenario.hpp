#pragma once

#include <array>
#include <cstdint>

#include "json.hpp"

#include "mecrelay/model.hpp"

namespace mecrelay::scenario {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

enum class PathLossModelId { Cost231HataUrban, FreeSpace };

struct PathLossModel {
  PathLossModelId model_id = PathLossModelId::Cost231HataUrban;
  double bs_height = 10.0;           // m
  double min_distance_clamp = 25.0;  // m; distances below it are evaluated at the clamp
  double shadowing_sigma_db = 0.0;   // log-normal shadowing, 0 = off
};

/// Path loss in dB. COST 231 Hata urban (metropolitan +3 dB) or free space.
double path_loss_db(const PathLossModel& model, double distance_m, double freq_hz);

/// Linear gain 10^(-pl/10), capped at 1.
double gain_from_loss_db(double loss_db);

/// Axis-aligned relay area. The UE sits at the origin and the BS at (d, 0); a
/// zone covers x in [x_from*d, x_to*d] and |y| <= half_width.
struct RelayZone {
  double x_from;
  double x_to;
  double half_width;  // m
};

struct Geometry {
  double ue_bs_distance = 0.0;
  std::array<RelayZone, 2> relay_zones{};
  std::array<Point, 2> relay_positions{};

  Point ue() const { return {0.0, 0.0}; }
  Point bs() const { return {ue_bs_distance, 0.0}; }
};

struct Range {
  double lo;
  double hi;
};

struct TaskRanges {
  Range data_bits{0.5e6, 2e6};
  Range cycles_per_bit{1500.0, 2000.0};
  Range ue_speed{0.5e9, 2e9};
  Range distance{25.0, 150.0};
  double server_speed = 4e10;
};

struct DropConfig {
  RadioParams radio;
  PathLossModel path_loss;
  std::array<RelayZone, 2> zones{RelayZone{0.25, 0.5, 15.0}, RelayZone{0.5, 0.75, 15.0}};
  TaskRanges ranges;
  double si_cancellation_db = 110.0;
  double min_node_distance = 1.0;  // m, between consecutive nodes of the chain
};

/// Throws std::invalid_argument on a malformed drop configuration.
void check(const DropConfig& cfg);

/// One Monte Carlo realization. Gains for all three route variants share the geometry.
struct Drop {
  std::uint64_t index = 0;
  Geometry geometry;
  double data_bits = 0.0;
  double cycles_per_bit = 0.0;
  double ue_speed = 0.0;
  double server_speed = 0.0;

  double gain_direct = 0.0;                 // UE -> BS
  std::array<double, 2> gains_two_hop{};    // UE -> R1, R1 -> BS
  std::array<double, 3> gains_three_hop{};  // UE -> R1, R1 -> R2, R2 -> BS
  double gain_self = 0.0;                   // R2 self-interference
  double gain_cross = 0.0;                  // R1 -> BS

  TaskSpec task(double deadline) const;
  ChannelSet direct_channels() const;
  ChannelSet two_hop_channels() const;
  ChannelSet three_hop_channels() const;
};

/// Deterministic in (seed, index): each drop draws from its own substream.
Drop generate_drop(std::uint64_t seed, std::uint64_t index, const DropConfig& cfg);

/// Uniform [0,1) stream for drop `index` of run `seed`.
class DropRng {
 public:
  DropRng(std::uint64_t seed, std::uint64_t index);
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t next();
  std::uint64_t state_;
};

nlohmann::json to_json(const Drop& drop);
/// Inverse of to_json. Throws nlohmann::json exceptions on malformed input.
Drop drop_from_json(const nlohmann::json& j);

}  // namespace mecrelay::scenario
