#pragma once

#include "mecrelay/model.hpp"

namespace mecrelay::schemes {

enum class BaselineTimePolicy { EqualSplit };

/// Default residual self-interference after cancellation, in dB.
inline constexpr double kDefaultSiCancellationDb = 110.0;

struct SchemeConfig {
  SchemeId scheme_id = SchemeId::HDFDS;
  BaselineTimePolicy baseline_time_policy = BaselineTimePolicy::EqualSplit;
  double si_cancellation_db = kDefaultSiCancellationDb;

  double self_interference_gain() const;
};

/// g_self = 10^(-cancellation_db / 10). Throws std::invalid_argument when db < 0.
double si_gain_from_db(double cancellation_db);

/// Relative tolerance of the 1-D searches over slots and bandwidth.
inline constexpr double kSearchTolerance = 1e-9;

// Optimized relaying cases. All three need a 3-hop scenario.

/// HD at both relays: full band on every hop, slots from marginal-energy
/// equalization over the budget with the P_max-implied slot floors.
Allocation solve_hd_hd(const Scenario& scenario);

/// HD at R1, FD-Orthogonal at R2: hop 1 takes the full band, hops 2 and 3 share
/// one slot and split the band. Golden search over t1, nested golden search over
/// the band split.
Allocation solve_hd_fdo(const Scenario& scenario);

/// HD at R1, FD-Shared at R2: full band everywhere, hops 2 and 3 interfere.
/// Golden search over t1; FD powers in closed form.
Allocation solve_hd_fds(const Scenario& scenario);

// Baselines.

/// Computes at the UE; succeeds iff c*D/F_u <= T_max. No transmit energy.
Allocation baseline_local(const TaskSpec& task, double ue_speed);

/// Single hop UE -> BS over the whole budget.
Allocation baseline_direct(const Scenario& scenario);

/// UE -> R1 -> BS with HD at R1, slot-optimized like solve_hd_hd.
Allocation baseline_two_hop_hd(const Scenario& scenario);

/// HD at both relays with equal slots budget/3 and minimum power per hop.
Allocation baseline_three_hop_unopt(const Scenario& scenario);

/// Dispatch for every offloading scheme (not Local). The scenario must carry the
/// hop count the scheme expects.
Allocation solve(SchemeId id, const Scenario& scenario);

}  // namespace mecrelay::schemes
