#include "mecrelay/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mecrelay/schemes.hpp"

namespace mecrelay::scenario {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double path_loss_db(const PathLossModel& model, double distance_m, double freq_hz) {
  const double d = std::max(distance_m, model.min_distance_clamp);
  switch (model.model_id) {
    case PathLossModelId::Cost231HataUrban: {
      const double f_mhz = freq_hz / 1e6;
      const double hb = model.bs_height;
      return 46.3 + 33.9 * std::log10(f_mhz) - 13.82 * std::log10(hb) +
             (44.9 - 6.55 * std::log10(hb)) * std::log10(d / 1000.0) + 3.0;
    }
    case PathLossModelId::FreeSpace: {
      constexpr double c = 299792458.0;
      return 20.0 * std::log10(4.0 * std::numbers::pi * d * freq_hz / c);
    }
  }
  throw std::invalid_argument("path_loss_db: unknown model");
}

double gain_from_loss_db(double loss_db) { return std::min(1.0, std::pow(10.0, -loss_db / 10.0)); }

void check(const DropConfig& cfg) {
  auto range_ok = [](Range r) { return r.lo > 0.0 && r.lo <= r.hi && std::isfinite(r.hi); };
  if (!range_ok(cfg.ranges.data_bits) || !range_ok(cfg.ranges.cycles_per_bit) ||
      !range_ok(cfg.ranges.ue_speed) || !range_ok(cfg.ranges.distance))
    throw std::invalid_argument("drop config: task ranges must be positive with lo <= hi");
  if (!(cfg.ranges.server_speed > 0.0)) throw std::invalid_argument("drop config: server_speed must be positive");
  for (const RelayZone& z : cfg.zones) {
    if (!(z.x_from >= 0.0 && z.x_from <= z.x_to && z.x_to <= 1.0 && z.half_width >= 0.0))
      throw std::invalid_argument("drop config: relay zone must satisfy 0 <= x_from <= x_to <= 1, half_width >= 0");
  }
  if (!(cfg.path_loss.min_distance_clamp >= 0.0)) throw std::invalid_argument("drop config: distance clamp must be >= 0");
  if (!(cfg.path_loss.bs_height > 0.0)) throw std::invalid_argument("drop config: bs_height must be positive");
  if (!(cfg.path_loss.shadowing_sigma_db >= 0.0)) throw std::invalid_argument("drop config: shadowing sigma must be >= 0");
  if (!(cfg.min_node_distance >= 0.0)) throw std::invalid_argument("drop config: min_node_distance must be >= 0");
  if (!(cfg.si_cancellation_db >= 0.0)) throw std::invalid_argument("drop config: si_cancellation_db must be >= 0");
}

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

DropRng::DropRng(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t a = seed;
  std::uint64_t b = index ^ 0x6a09e667f3bcc909ULL;
  state_ = splitmix64(a) ^ (splitmix64(b) * 0xd1b54a32d192ed03ULL);
}

std::uint64_t DropRng::next() { return splitmix64(state_); }

double DropRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double DropRng::normal() {
  // Box-Muller; u1 in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

TaskSpec Drop::task(double deadline) const {
  return TaskSpec{data_bits, cycles_per_bit, deadline, server_speed};
}

ChannelSet Drop::direct_channels() const { return ChannelSet::direct(gain_direct); }

ChannelSet Drop::two_hop_channels() const {
  return ChannelSet::two_hop(gains_two_hop[0], gains_two_hop[1]);
}

ChannelSet Drop::three_hop_channels() const {
  return ChannelSet::three_hop(gains_three_hop[0], gains_three_hop[1], gains_three_hop[2], gain_self,
                               gain_cross);
}

Drop generate_drop(std::uint64_t seed, std::uint64_t index, const DropConfig& cfg) {
  DropRng rng(seed, index);
  Drop drop;
  drop.index = index;
  drop.data_bits = rng.uniform(cfg.ranges.data_bits.lo, cfg.ranges.data_bits.hi);
  drop.cycles_per_bit = rng.uniform(cfg.ranges.cycles_per_bit.lo, cfg.ranges.cycles_per_bit.hi);
  drop.ue_speed = rng.uniform(cfg.ranges.ue_speed.lo, cfg.ranges.ue_speed.hi);
  drop.server_speed = cfg.ranges.server_speed;

  Geometry& geo = drop.geometry;
  geo.ue_bs_distance = rng.uniform(cfg.ranges.distance.lo, cfg.ranges.distance.hi);
  geo.relay_zones = cfg.zones;
  const double d = geo.ue_bs_distance;

  auto place = [&](const RelayZone& z) {
    const double x = rng.uniform(z.x_from * d, z.x_to * d);
    const double y = rng.uniform(-z.half_width, z.half_width);
    return Point{x, y};
  };
  // Redraw both relays until every consecutive pair is separated by more than d_min.
  for (int attempt = 0;; ++attempt) {
    geo.relay_positions = {place(cfg.zones[0]), place(cfg.zones[1])};
    const auto& r = geo.relay_positions;
    const bool separated = distance(geo.ue(), r[0]) > cfg.min_node_distance &&
                           distance(r[0], r[1]) > cfg.min_node_distance &&
                           distance(r[1], geo.bs()) > cfg.min_node_distance;
    if (separated) break;
    if (attempt > 10000) throw std::runtime_error("generate_drop: relay zones cannot honor min_node_distance");
  }

  const PathLossModel& pl = cfg.path_loss;
  const double f = cfg.radio.carrier_freq;
  auto link_gain = [&](Point a, Point b) {
    double loss = path_loss_db(pl, distance(a, b), f);
    if (pl.shadowing_sigma_db > 0.0) loss += pl.shadowing_sigma_db * rng.normal();
    return gain_from_loss_db(loss);
  };
  const Point ue = geo.ue(), bs = geo.bs();
  const Point r1 = geo.relay_positions[0], r2 = geo.relay_positions[1];

  drop.gain_direct = link_gain(ue, bs);
  const double g_ue_r1 = link_gain(ue, r1);
  const double g_r1_bs = link_gain(r1, bs);
  drop.gains_two_hop = {g_ue_r1, g_r1_bs};
  drop.gains_three_hop = {g_ue_r1, link_gain(r1, r2), link_gain(r2, bs)};
  drop.gain_cross = g_r1_bs;
  drop.gain_self = schemes::si_gain_from_db(cfg.si_cancellation_db);
  return drop;
}

nlohmann::json to_json(const Drop& drop) {
  const auto& g = drop.geometry;
  nlohmann::json zones = nlohmann::json::array();
  for (const auto& z : g.relay_zones)
    zones.push_back({{"x_from", z.x_from}, {"x_to", z.x_to}, {"half_width_m", z.half_width}});
  return {
      {"index", drop.index},
      {"ue_bs_distance_m", g.ue_bs_distance},
      {"relay_zones", zones},
      {"relays", {{g.relay_positions[0].x, g.relay_positions[0].y}, {g.relay_positions[1].x, g.relay_positions[1].y}}},
      {"data_bits", drop.data_bits},
      {"cycles_per_bit", drop.cycles_per_bit},
      {"ue_speed", drop.ue_speed},
      {"server_speed", drop.server_speed},
      {"gains",
       {{"direct", drop.gain_direct},
        {"two_hop", drop.gains_two_hop},
        {"three_hop", drop.gains_three_hop},
        {"self", drop.gain_self},
        {"cross", drop.gain_cross}}},
  };
}

Drop drop_from_json(const nlohmann::json& j) {
  Drop drop;
  drop.index = j.value("index", std::uint64_t{0});
  auto& g = drop.geometry;
  g.ue_bs_distance = j.value("ue_bs_distance_m", 0.0);
  if (j.contains("relay_zones")) {
    const auto& zs = j.at("relay_zones");
    for (std::size_t i = 0; i < 2 && i < zs.size(); ++i)
      g.relay_zones[i] = {zs[i].at("x_from").get<double>(), zs[i].at("x_to").get<double>(),
                          zs[i].at("half_width_m").get<double>()};
  }
  if (j.contains("relays")) {
    const auto& rs = j.at("relays");
    for (std::size_t i = 0; i < 2; ++i) g.relay_positions[i] = {rs.at(i).at(0).get<double>(), rs.at(i).at(1).get<double>()};
  }
  drop.data_bits = j.at("data_bits").get<double>();
  drop.cycles_per_bit = j.at("cycles_per_bit").get<double>();
  drop.ue_speed = j.value("ue_speed", 0.0);
  drop.server_speed = j.at("server_speed").get<double>();
  const auto& gains = j.at("gains");
  drop.gain_direct = gains.at("direct").get<double>();
  drop.gains_two_hop = gains.at("two_hop").get<std::array<double, 2>>();
  drop.gains_three_hop = gains.at("three_hop").get<std::array<double, 3>>();
  drop.gain_self = gains.at("self").get<double>();
  drop.gain_cross = gains.at("cross").get<double>();
  return drop;
}

}  // namespace mecrelay::scenario
