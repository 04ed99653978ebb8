#include "doctest.h"

#include <cmath>

#include "mecrelay/scenario.hpp"
#include "mecrelay/schemes.hpp"

using namespace mecrelay;
using namespace mecrelay::scenario;

TEST_CASE("COST 231 Hata urban regression values at 2 GHz, h_b = 10 m") {
  const PathLossModel m{};
  CHECK(path_loss_db(m, 100.0, 2e9) == doctest::Approx(109.03491685300895594).epsilon(1e-13));
  CHECK(path_loss_db(m, 25.0, 2e9) == doctest::Approx(85.945916185581594751).epsilon(1e-13));
  // below the clamp the loss stays at its 25 m value
  CHECK(path_loss_db(m, 3.0, 2e9) == path_loss_db(m, 25.0, 2e9));
  CHECK(path_loss_db(m, 0.0, 2e9) == path_loss_db(m, 25.0, 2e9));
  CHECK(path_loss_db(m, 200.0, 2e9) - path_loss_db(m, 100.0, 2e9) ==
        doctest::Approx(11.544500333713679264).epsilon(1e-12));
}

TEST_CASE("free-space regression value") {
  PathLossModel m;
  m.model_id = PathLossModelId::FreeSpace;
  CHECK(path_loss_db(m, 100.0, 2e9) == doctest::Approx(78.468383135162997712).epsilon(1e-13));
  CHECK(path_loss_db(m, 1000.0, 2e9) - path_loss_db(m, 100.0, 2e9) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("path loss grows with distance and the gain shrinks") {
  for (auto id : {PathLossModelId::Cost231HataUrban, PathLossModelId::FreeSpace}) {
    PathLossModel m;
    m.model_id = id;
    m.min_distance_clamp = 0.0;
    double prev = -1e300;
    for (double d = 1.0; d < 1e4; d *= 1.3) {
      const double pl = path_loss_db(m, d, 2e9);
      CHECK(pl > prev);
      prev = pl;
    }
  }
  CHECK(gain_from_loss_db(30.0) == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(gain_from_loss_db(-5.0) == 1.0);
}

TEST_CASE("drops are deterministic in (seed, index)") {
  const DropConfig cfg;
  const Drop a = generate_drop(9, 123, cfg), b = generate_drop(9, 123, cfg);
  CHECK(to_json(a) == to_json(b));
  CHECK(to_json(generate_drop(9, 124, cfg)) != to_json(a));
  CHECK(to_json(generate_drop(10, 123, cfg)) != to_json(a));
}

TEST_CASE("relays stay in their zones and apart") {
  DropConfig cfg;
  cfg.min_node_distance = 5.0;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const Drop d = generate_drop(3, i, cfg);
    const Geometry& g = d.geometry;
    CHECK(g.ue_bs_distance >= 25.0);
    CHECK(g.ue_bs_distance <= 150.0);
    for (int k = 0; k < 2; ++k) {
      const RelayZone& z = cfg.zones[k];
      const Point p = g.relay_positions[k];
      CHECK(p.x >= z.x_from * g.ue_bs_distance);
      CHECK(p.x <= z.x_to * g.ue_bs_distance);
      CHECK(std::abs(p.y) <= z.half_width);
    }
    CHECK(distance(g.ue(), g.relay_positions[0]) > 5.0);
    CHECK(distance(g.relay_positions[0], g.relay_positions[1]) > 5.0);
    CHECK(distance(g.relay_positions[1], g.bs()) > 5.0);
    CHECK(d.data_bits >= 0.5e6);
    CHECK(d.data_bits <= 2e6);
    CHECK(d.gain_cross == d.gains_two_hop[1]);
    CHECK(d.gains_two_hop[0] == d.gains_three_hop[0]);
    CHECK(d.gain_self == doctest::Approx(1e-11).epsilon(1e-14));
  }
}

TEST_CASE("task sizes average to the range midpoint") {
  const DropConfig cfg;
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += generate_drop(1, i, cfg).data_bits;
  CHECK(sum / n == doctest::Approx(1.25e6).epsilon(0.01));
}

TEST_CASE("a longer hop has the smaller gain") {
  DropConfig cfg;
  cfg.path_loss.min_distance_clamp = 0.0;
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const Drop d = generate_drop(5, i, cfg);
    const Geometry& g = d.geometry;
    const double d_ue_r1 = distance(g.ue(), g.relay_positions[0]);
    const double d_r1_bs = distance(g.relay_positions[0], g.bs());
    if (d_ue_r1 < d_r1_bs) CHECK(d.gains_two_hop[0] > d.gains_two_hop[1]);
    if (d_ue_r1 > d_r1_bs) CHECK(d.gains_two_hop[0] < d.gains_two_hop[1]);
    CHECK(d.gain_direct < d.gains_two_hop[0]);
    CHECK(d.gain_direct < d.gains_two_hop[1]);
  }
}

TEST_CASE("UE to R1 distance statistics") {
  // With zero-width zones R1 lies on the axis at x ~ U(0.25, 0.5) * d, d ~ U(25, 150):
  // E = 0.375 * 87.5, Var = E[x^2] - E^2 with E[x^2] = E[u^2] E[d^2].
  DropConfig cfg;
  cfg.zones = {RelayZone{0.25, 0.5, 0.0}, RelayZone{0.5, 0.75, 0.0}};
  cfg.min_node_distance = 0.0;
  const double mean = 0.375 * 87.5;
  const double eu2 = (0.5 * 0.5 * 0.5 - 0.25 * 0.25 * 0.25) / (3 * 0.25);
  const double ed2 = (150.0 * 150.0 * 150.0 - 25.0 * 25.0 * 25.0) / (3 * 125.0);
  const double sd = std::sqrt(eu2 * ed2 - mean * mean);
  const int n = 20000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += generate_drop(11, i, cfg).geometry.relay_positions[0].x;
  CHECK(std::abs(sum / n - mean) <= 3.0 * sd / std::sqrt(double(n)));
}

TEST_CASE("drop JSON round trip") {
  const Drop d = generate_drop(2, 77, DropConfig{});
  const Drop back = drop_from_json(to_json(d));
  CHECK(to_json(back) == to_json(d));
  CHECK(back.gains_three_hop == d.gains_three_hop);
  CHECK(back.data_bits == d.data_bits);
}

TEST_CASE("shadowing is deterministic and perturbs the gains") {
  DropConfig cfg;
  cfg.path_loss.shadowing_sigma_db = 8.0;
  const Drop a = generate_drop(4, 8, cfg), b = generate_drop(4, 8, cfg);
  CHECK(a.gains_three_hop == b.gains_three_hop);
  const Drop plain = generate_drop(4, 8, DropConfig{});
  CHECK(plain.geometry.ue_bs_distance == a.geometry.ue_bs_distance);
  CHECK(plain.gain_direct != a.gain_direct);
}

TEST_CASE("drop config checks") {
  DropConfig cfg;
  CHECK_NOTHROW(check(cfg));
  cfg.ranges.data_bits = Range{2e6, 1e6};
  CHECK_THROWS_AS(check(cfg), std::invalid_argument);
  cfg = DropConfig{};
  cfg.zones[0].x_to = 1.5;
  CHECK_THROWS_AS(check(cfg), std::invalid_argument);
  cfg = DropConfig{};
  cfg.path_loss.bs_height = 0.0;
  CHECK_THROWS_AS(check(cfg), std::invalid_argument);
  cfg = DropConfig{};
  cfg.si_cancellation_db = -3.0;
  CHECK_THROWS_AS(check(cfg), std::invalid_argument);
}

TEST_CASE("unsatisfiable spacing is reported") {
  DropConfig cfg;
  cfg.min_node_distance = 1000.0;
  CHECK_THROWS_AS(generate_drop(1, 0, cfg), std::runtime_error);
}
