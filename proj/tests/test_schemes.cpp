#include "doctest.h"

#include <cmath>
#include <random>

#include "mecrelay/link.hpp"
#include "mecrelay/oracle.hpp"
#include "mecrelay/schemes.hpp"

using namespace mecrelay;
using namespace mecrelay::schemes;

namespace {

const RadioParams kRadio{};

TaskSpec task(double deadline, double bits = 1.25e6) { return TaskSpec{bits, 1750.0, deadline, 4e10}; }

Scenario three_hop(double g1, double g2, double g3, double deadline = 0.4, double gs = 1e-11, double gc = 1e-10,
                   double bits = 1.25e6) {
  return validate(kRadio, task(deadline, bits), ChannelSet::three_hop(g1, g2, g3, gs, gc));
}

struct Rng {
  std::mt19937_64 gen{424242};
  double log_uni(double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(gen));
  }
  double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
};

double rel_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("HD+HD on a symmetric chain uses equal slots") {
  const Scenario s = three_hop(3e-10, 3e-10, 3e-10);
  const Allocation a = solve_hd_hd(s);
  REQUIRE(a.feasible);
  CHECK(a.time_slots[0] == doctest::Approx(s.budget() / 3).epsilon(1e-8));
  CHECK(a.time_slots[1] == doctest::Approx(s.budget() / 3).epsilon(1e-8));
  CHECK(a.time_slots[2] == doctest::Approx(s.budget() / 3).epsilon(1e-8));
  CHECK(a.comm_delay == doctest::Approx(s.budget()).epsilon(1e-12));
  CHECK(audit_allocation(a, s).empty());
}

TEST_CASE("optimized schemes match the grid oracle on random instances") {
  Rng r;
  int solved = 0;
  for (int i = 0; i < 12; ++i) {
    const Scenario s = three_hop(r.log_uni(3e-11, 1e-8), r.log_uni(3e-11, 1e-8), r.log_uni(3e-11, 1e-8),
                                 r.uni(0.15, 1.0), r.log_uni(1e-13, 1e-10), r.log_uni(1e-11, 1e-8));
    for (SchemeId id : {SchemeId::HDHD, SchemeId::HDFDO, SchemeId::HDFDS}) {
      const Allocation a = solve(id, s);
      const solver::SolveReport o = oracle::oracle_solve(id, s);
      CHECK(a.feasible == o.feasible());
      if (a.feasible && o.feasible()) {
        ++solved;
        CHECK(audit_allocation(a, s).empty());
        // grid points are feasible, so the oracle can only sit above the optimum
        CHECK(a.total_energy <= o.value * (1 + 1e-9));
        CHECK(rel_gap(a.total_energy, o.value) <= 1e-4);
      }
    }
  }
  CHECK(solved >= 12);
}

TEST_CASE("an impossible budget is infeasible for every scheme, as the oracle agrees") {
  const Scenario s = three_hop(1e-14, 1e-14, 1e-14, 0.06);
  for (SchemeId id : {SchemeId::HDHD, SchemeId::HDFDO, SchemeId::HDFDS, SchemeId::ThreeHopUnopt}) {
    const Allocation a = solve(id, s);
    CHECK_FALSE(a.feasible);
    CHECK(std::isinf(a.total_energy));
    CHECK_FALSE(oracle::oracle_solve(id, s).feasible());
  }
}

TEST_CASE("HD+FD-Orthogonal splits the band evenly between equal hops") {
  const Scenario s = three_hop(2e-10, 7e-11, 7e-11);
  const Allocation a = solve_hd_fdo(s);
  REQUIRE(a.feasible);
  CHECK(a.bandwidths[1] == doctest::Approx(kRadio.bandwidth_max / 2).epsilon(1e-6));
  CHECK(a.bandwidths[2] == doctest::Approx(kRadio.bandwidth_max / 2).epsilon(1e-6));
  CHECK(a.time_slots[1] == a.time_slots[2]);
  CHECK(a.bandwidths[1] + a.bandwidths[2] <= kRadio.bandwidth_max * (1 + 1e-12));
}

TEST_CASE("HD+FD-Orthogonal has the HD+HD energy when no cap binds") {
  // Hop energy depends on the slot-band product only, so both schemes reach the same optimum.
  Rng r;
  for (int i = 0; i < 20; ++i) {
    const Scenario s = three_hop(r.log_uni(1e-10, 1e-8), r.log_uni(1e-10, 1e-8), r.log_uni(1e-10, 1e-8), 0.8);
    const Allocation hd = solve_hd_hd(s), fdo = solve_hd_fdo(s);
    REQUIRE(hd.feasible);
    REQUIRE(fdo.feasible);
    CHECK(rel_gap(hd.total_energy, fdo.total_energy) <= 1e-6);
  }
}

TEST_CASE("a stronger first hop never lengthens its slot") {
  double prev = std::numeric_limits<double>::infinity();
  for (double g1 = 1e-10; g1 <= 1e-7; g1 *= 1.5) {
    const Allocation a = solve_hd_hd(three_hop(g1, 3e-10, 3e-10));
    REQUIRE(a.feasible);
    CHECK(a.time_slots[0] <= prev * (1 + 1e-9));
    prev = a.time_slots[0];
  }
}

TEST_CASE("FD-Shared with ideal isolation beats FD-Orthogonal") {
  Rng r;
  for (int i = 0; i < 20; ++i) {
    const Scenario s = three_hop(r.log_uni(3e-11, 1e-8), r.log_uni(3e-11, 1e-8), r.log_uni(3e-11, 1e-8),
                                 r.uni(0.2, 1.0), 0.0, 0.0);
    const Allocation fds = solve_hd_fds(s), fdo = solve_hd_fdo(s);
    if (fdo.feasible) {
      REQUIRE(fds.feasible);
      CHECK(fds.total_energy <= fdo.total_energy * (1 + 1e-9));
    }
  }
}

TEST_CASE("better self-interference cancellation never costs energy") {
  const double g_cross = 1e-10;
  double prev = std::numeric_limits<double>::infinity();
  bool any = false;
  for (double db = 70.0; db <= 130.0; db += 5.0) {
    const Scenario s = three_hop(2e-10, 3e-10, 4e-10, 0.3, si_gain_from_db(db), g_cross);
    const Allocation a = solve_hd_fds(s);
    if (!a.feasible) {
      CHECK_FALSE(any);  // once feasible, stays feasible
      continue;
    }
    any = true;
    CHECK(a.total_energy <= prev * (1 + 1e-9));
    prev = a.total_energy;
  }
  CHECK(any);
}

TEST_CASE("si_gain_from_db") {
  CHECK(si_gain_from_db(110.0) == doctest::Approx(1e-11).epsilon(1e-14));
  CHECK(si_gain_from_db(0.0) == 1.0);
  CHECK_THROWS_AS(si_gain_from_db(-1.0), std::invalid_argument);
  CHECK(SchemeConfig{}.self_interference_gain() == doctest::Approx(1e-11).epsilon(1e-14));
}

TEST_CASE("local computing") {
  const TaskSpec t = task(0.5, 1e6);
  SUBCASE("fast UE meets the deadline at zero energy") {
    const Allocation a = baseline_local(TaskSpec{0.5e6, 1500.0, 0.5, 4e10}, 2e9);
    CHECK(a.processing_delay == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(a.feasible);
    CHECK(a.total_energy == 0.0);
  }
  SUBCASE("slow UE misses it") {
    const Allocation a = baseline_local(TaskSpec{2e6, 2000.0, 1.0, 4e10}, 0.5e9);
    CHECK(a.processing_delay == doctest::Approx(8.0).epsilon(1e-15));
    CHECK_FALSE(a.feasible);
    CHECK(std::isinf(a.total_energy));
  }
  SUBCASE("exactly on the deadline succeeds") {
    CHECK(baseline_local(TaskSpec{1e6, 1000.0, 0.5, 4e10}, 2e9).feasible);
  }
  CHECK_THROWS_AS(baseline_local(t, 0.0), std::invalid_argument);
}

TEST_CASE("direct offloading transmits over the whole budget") {
  const Scenario s = validate(kRadio, task(0.4), ChannelSet::direct(1e-10));
  const Allocation a = baseline_direct(s);
  REQUIRE(a.feasible);
  CHECK(a.time_slots[0] == s.budget());
  CHECK(a.powers[0] == doctest::Approx(link::required_power_hd(s.budget(), kRadio.bandwidth_max, 1.25e6, 1e-10, kRadio)));

  const double g_weak = 1e-15;
  REQUIRE(link::min_slot_hd(kRadio.bandwidth_max, 1.25e6, g_weak, kRadio) > s.budget());
  CHECK_FALSE(baseline_direct(validate(kRadio, task(0.4), ChannelSet::direct(g_weak))).feasible);
}

TEST_CASE("two-hop HD baseline") {
  const Allocation a = baseline_two_hop_hd(validate(kRadio, task(0.4), ChannelSet::two_hop(3e-10, 3e-10)));
  REQUIRE(a.feasible);
  CHECK(a.time_slots[0] == doctest::Approx(a.time_slots[1]).epsilon(1e-8));
  CHECK_FALSE(baseline_two_hop_hd(validate(kRadio, task(0.4), ChannelSet::two_hop(1e-16, 3e-10))).feasible);
  CHECK_THROWS_AS(baseline_two_hop_hd(three_hop(1e-10, 1e-10, 1e-10)), std::invalid_argument);
}

TEST_CASE("unoptimized three-hop baseline") {
  SUBCASE("symmetric chain: equal split is already optimal") {
    const Scenario s = three_hop(4e-10, 4e-10, 4e-10);
    const Allocation u = baseline_three_hop_unopt(s), h = solve_hd_hd(s);
    REQUIRE(u.feasible);
    CHECK(u.total_energy == doctest::Approx(h.total_energy).epsilon(1e-9));
  }
  SUBCASE("never beats HD+HD") {
    Rng r;
    for (int i = 0; i < 100; ++i) {
      const Scenario s = three_hop(r.log_uni(1e-11, 1e-8), r.log_uni(1e-11, 1e-8), r.log_uni(1e-11, 1e-8),
                                   r.uni(0.1, 1.0));
      const Allocation u = baseline_three_hop_unopt(s), h = solve_hd_hd(s);
      if (u.feasible) {
        REQUIRE(h.feasible);
        CHECK(h.total_energy <= u.total_energy * (1 + 1e-9));
      }
    }
  }
  SUBCASE("an uneven chain where only the optimized split fits") {
    // hop 1 needs more than a third of the budget at P_max, the others far less
    const double budget = 0.4 - 0.0546875;
    const double b = kRadio.bandwidth_max;
    double g1 = 1e-10;
    while (link::min_slot_hd(b, 1.25e6, g1, kRadio) < 0.5 * budget) g1 *= 0.9;
    const Scenario s = three_hop(g1, 1e-9, 1e-9);
    CHECK_FALSE(baseline_three_hop_unopt(s).feasible);
    CHECK(solve_hd_hd(s).feasible);
  }
}

TEST_CASE("optimized allocations are locally optimal and use the whole budget") {
  Rng r;
  for (int i = 0; i < 30; ++i) {
    const Scenario s = three_hop(r.log_uni(3e-11, 1e-8), r.log_uni(3e-11, 1e-8), r.log_uni(3e-11, 1e-8),
                                 r.uni(0.2, 1.0));
    const Allocation a = solve_hd_hd(s);
    if (!a.feasible) continue;
    CHECK(a.comm_delay == doctest::Approx(s.budget()).epsilon(1e-12));
    const double b = kRadio.bandwidth_max, d = s.task().data_bits;
    const auto& g = s.channels().hop_gains;
    // shift 1% of one slot into another; the energy must not drop
    for (int from = 0; from < 3; ++from) {
      for (int to = 0; to < 3; ++to) {
        if (from == to) continue;
        std::vector<double> t = a.time_slots;
        const double delta = 0.01 * t[from];
        t[from] -= delta;
        t[to] += delta;
        double e = 0.0;
        for (int k = 0; k < 3; ++k) e += link::hd_energy(t[k], b, d, g[k], kRadio);
        if (std::isfinite(e)) CHECK(e >= a.total_energy * (1 - 1e-12));
      }
    }
    for (SchemeId id : {SchemeId::HDFDO, SchemeId::HDFDS}) {
      const Allocation f = solve(id, s);
      if (f.feasible) CHECK(f.comm_delay == doctest::Approx(s.budget()).epsilon(1e-12));
    }
  }
}

TEST_CASE("scheme dispatch checks the hop count") {
  CHECK_THROWS_AS(solve(SchemeId::HDHD, validate(kRadio, task(0.4), ChannelSet::direct(1e-10))), std::invalid_argument);
  CHECK_THROWS_AS(solve(SchemeId::Local, three_hop(1e-10, 1e-10, 1e-10)), std::invalid_argument);
}
